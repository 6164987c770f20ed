#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>

namespace pif {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  ///< 0 binds an ephemeral port
  std::filesystem::path data_dir = "pif-data";
  int workers = 0;  ///< fit worker threads; 0 means one per core
  std::size_t max_upload_bytes = 32u << 20;
  std::size_t preview_long_edge = 1024;
};

/// Flags > PIF_PORT / PIF_DATA_DIR / PIF_WORKERS > defaults. Only fields whose
/// `*_set` flag is false are taken from the environment.
struct ServiceOverrides {
  bool port_set = false;
  bool data_dir_set = false;
  bool workers_set = false;
};
ServiceConfig resolve_service_config(ServiceConfig flags, const ServiceOverrides& given);

/// HTTP service over a data directory holding `references/` and `presets/`.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the socket; returns the bound port. Io error when binding fails.
  int bind();
  /// Serves until stop(). Call after bind().
  void serve();
  /// Binds and serves on a background thread; returns the bound port.
  int start();
  /// Stops accepting, drains fit workers and joins the background thread.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pif
