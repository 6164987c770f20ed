#include "pif/service.hpp"

#include <algorithm>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "pif/digest.hpp"
#include "pif/error.hpp"
#include "pif/fit.hpp"
#include "pif/image_io.hpp"
#include "pif/metrics.hpp"
#include "pif/pcturb.hpp"
#include "pif/preset_store.hpp"

namespace pif {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

[[noreturn]] void bad_request(const std::string& message) {
  throw Error(ErrorCode::Schema, message);
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::Conflict: return 409;
    case ErrorCode::DegenerateImage: return 422;
    case ErrorCode::Io: return 500;
    default: return 400;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  send_json(res, status, json{{"error", code}, {"message", message}});
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

// Maps library errors onto status codes.
Handler guarded(Handler inner) {
  return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
    try {
      inner(req, res);
    } catch (const Error& e) {
      send_error(res, status_for(e.code()), to_string(e.code()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, to_string(ErrorCode::Schema), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "Internal", e.what());
    }
  };
}

json parse_body(const std::string& body) {
  try {
    json doc = json::parse(body);
    if (!doc.is_object()) bad_request("request body must be a JSON object");
    return doc;
  } catch (const json::parse_error& e) {
    bad_request(std::string("invalid JSON: ") + e.what());
  }
}

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; })) {
      bad_request(where + " has unknown field \"" + key + "\"");
    }
  }
}

bool is_digest(const std::string& s) {
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

// Uploaded images keyed by the digest of their decoded pixels. The original bytes
// are kept so renders and fits see the source bit depth.
class ReferenceStore {
 public:
  explicit ReferenceStore(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + dir_.string());
  }

  std::pair<std::string, DecodedImage> add(const std::string& bytes) {
    DecodedImage decoded = decode_image(
        std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
    if (is_constant_image(decoded.image)) {
      throw Error(ErrorCode::DegenerateImage, "reference image is constant");
    }
    const std::string id = image_digest(decoded.image);
    std::lock_guard lock(mutex_);
    const fs::path target = path_of(id);
    if (!fs::exists(target)) {
      fs::path tmp = target;
      tmp += ".tmp";
      write_file_bytes(tmp, std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()),
                                      bytes.size()));
      fs::rename(tmp, target);
    }
    return {id, std::move(decoded)};
  }

  fs::path path_for(const std::string& id) const {
    const fs::path p = is_digest(id) ? path_of(id) : fs::path();
    if (p.empty() || !fs::exists(p)) {
      throw Error(ErrorCode::NotFound, "unknown reference id '" + id + "'");
    }
    return p;
  }

  DecodedImage load(const std::string& id) const { return load_image_info(path_for(id)); }

 private:
  fs::path path_of(const std::string& id) const { return dir_ / (id + ".img"); }

  fs::path dir_;
  std::mutex mutex_;
};

enum class JobState { Queued, Running, Done, Failed };

const char* state_name(JobState s) {
  switch (s) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Done: return "done";
    case JobState::Failed: return "failed";
  }
  return "failed";
}

struct Job {
  std::string id;
  std::vector<std::string> reference_ids;
  FitConfig config;
  std::optional<std::string> save_as;

  // Guarded by the pool mutex.
  JobState state = JobState::Queued;
  int iteration = 0;
  double loss = 0.0;
  std::vector<std::pair<int, double>> history;
  std::optional<std::string> result;
  std::optional<std::string> error;
  std::string submitted_at;
  std::optional<std::string> finished_at;
};

struct Stopped {};

// Bounded pool of fit workers fed by a FIFO queue.
class JobPool {
 public:
  using Runner = std::function<StylePreset(Job&, const FitProgressCallback&)>;

  JobPool(int workers, Runner runner) : runner_(std::move(runner)) {
    for (int i = 0; i < workers; ++i) threads_.emplace_back([this] { work(); });
  }

  ~JobPool() { shutdown(); }

  std::string submit(std::shared_ptr<Job> job) {
    std::lock_guard lock(mutex_);
    job->id = "fit-" + std::to_string(++next_id_);
    job->submitted_at = now_rfc3339();
    jobs_[job->id] = job;
    queue_.push_back(job);
    cv_.notify_one();
    return job->id;
  }

  std::optional<json> view(const std::string& id) {
    std::lock_guard lock(mutex_);
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    const Job& j = *it->second;
    json out = json::object();
    out["id"] = j.id;
    out["state"] = state_name(j.state);
    out["progress"] = json{{"iteration", j.iteration}, {"loss", j.loss}};
    json history = json::array();
    for (const auto& [iteration, loss] : j.history) history.push_back(json::array({iteration, loss}));
    out["loss_history"] = std::move(history);
    out["reference_ids"] = j.reference_ids;
    out["save_as"] = j.save_as ? json(*j.save_as) : json(nullptr);
    out["result"] = j.result ? json::parse(*j.result) : json(nullptr);
    out["error"] = j.error ? json(*j.error) : json(nullptr);
    out["submitted_at"] = j.submitted_at;
    out["finished_at"] = j.finished_at ? json(*j.finished_at) : json(nullptr);
    return out;
  }

  void shutdown() {
    {
      std::lock_guard lock(mutex_);
      if (stopping_) return;
      stopping_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
    threads_.clear();
  }

 private:
  void work() {
    for (;;) {
      std::shared_ptr<Job> job;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
        if (stopping_) return;
        job = queue_.front();
        queue_.pop_front();
        job->state = JobState::Running;
      }
      const FitProgressCallback progress = [this, &job](const FitProgress& p) {
        std::lock_guard lock(mutex_);
        if (stopping_) throw Stopped{};
        job->iteration = p.iteration;
        job->loss = p.loss;
        job->history.emplace_back(p.iteration, p.loss);
      };
      std::optional<std::string> result;
      std::optional<std::string> error;
      try {
        result = encode_preset(runner_(*job, progress));
      } catch (const Stopped&) {
        error = "service stopped";
      } catch (const std::exception& e) {
        error = e.what();
      }
      std::lock_guard lock(mutex_);
      job->result = std::move(result);
      job->error = std::move(error);
      job->state = job->result ? JobState::Done : JobState::Failed;
      job->finished_at = now_rfc3339();
    }
  }

  Runner runner_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::shared_ptr<Job>> queue_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
  std::vector<std::thread> threads_;
  std::uint64_t next_id_ = 0;
  bool stopping_ = false;
};

FitConfig fit_config_from(const json& overrides) {
  FitConfig c;
  if (overrides.is_null()) return c;
  if (!overrides.is_object()) bad_request("config must be an object");
  reject_unknown(overrides, "config",
                 {"max_outer_iterations", "subset_size", "line_search_evals", "convergence_tol",
                  "seed", "downsample_long_edge", "loss_edge_weight"});
  auto integer = [&](const char* key, auto& field) {
    if (!overrides.contains(key)) return;
    const json& v = overrides[key];
    if (!v.is_number_integer()) bad_request(std::string("config.") + key + " must be an integer");
    if (v.get<long long>() < 0) bad_request(std::string("config.") + key + " must be >= 0");
    field = v.get<std::remove_reference_t<decltype(field)>>();
  };
  auto real = [&](const char* key, double& field) {
    if (!overrides.contains(key)) return;
    if (!overrides[key].is_number()) bad_request(std::string("config.") + key + " must be a number");
    field = overrides[key].get<double>();
  };
  integer("max_outer_iterations", c.max_outer_iterations);
  integer("subset_size", c.subset_size);
  integer("line_search_evals", c.line_search_evals);
  integer("seed", c.seed);
  integer("downsample_long_edge", c.downsample_long_edge);
  real("convergence_tol", c.convergence_tol);
  real("loss_edge_weight", c.loss_edge_weight);
  c.validate();
  return c;
}

ConceptValue concept_value_from(ConceptId id, const json& v) {
  if (is_hue_concept(id)) {
    if (!v.is_object()) bad_request("override for " + std::string(concept_name(id)) +
                                    " must be {strength, hue}");
    reject_unknown(v, "override", {"strength", "hue"});
    if (!v.contains("strength") || !v.contains("hue") || !v["strength"].is_number() ||
        !v["hue"].is_number()) {
      bad_request("override for " + std::string(concept_name(id)) + " needs numeric strength and hue");
    }
    return StrengthHue{v["strength"].get<double>(), v["hue"].get<double>()};
  }
  if (!v.is_number()) bad_request("override for " + std::string(concept_name(id)) + " must be a number");
  return Scalar{v.get<double>()};
}

ConceptId concept_or_400(const std::string& name) {
  const auto id = concept_from_name(name);
  if (!id) bad_request("unknown concept '" + name + "'");
  return *id;
}

const httplib::MultipartFormData* find_part(const httplib::Request& req, const char* key) {
  const auto it = req.files.find(key);
  return it == req.files.end() ? nullptr : &it->second;
}

}  // namespace

ServiceConfig resolve_service_config(ServiceConfig flags, const ServiceOverrides& given) {
  auto env = [](const char* key) -> const char* {
    const char* v = std::getenv(key);
    return v && *v ? v : nullptr;
  };
  auto parse_int = [](const char* key, const char* text) {
    char* end = nullptr;
    const long v = std::strtol(text, &end, 10);
    if (!end || *end != '\0') {
      throw Error(ErrorCode::InvalidArgument, std::string(key) + " must be an integer");
    }
    return static_cast<int>(v);
  };
  if (!given.port_set) {
    if (const char* v = env("PIF_PORT")) flags.port = parse_int("PIF_PORT", v);
  }
  if (!given.data_dir_set) {
    if (const char* v = env("PIF_DATA_DIR")) flags.data_dir = v;
  }
  if (!given.workers_set) {
    if (const char* v = env("PIF_WORKERS")) flags.workers = parse_int("PIF_WORKERS", v);
  }
  if (flags.workers <= 0) {
    flags.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  if (flags.port < 0 || flags.port > 65535) {
    throw Error(ErrorCode::OutOfRange, "port must be in [0, 65535]");
  }
  return flags;
}

struct Service::Impl {
  ServiceConfig config;
  PresetStore presets;
  ReferenceStore references;
  JobPool jobs;
  httplib::Server server;
  std::thread thread;
  int port = -1;

  explicit Impl(ServiceConfig c)
      : config(std::move(c)),
        presets(config.data_dir / "presets"),
        references(config.data_dir / "references"),
        jobs(std::max(1, config.workers),
             [this](Job& job, const FitProgressCallback& progress) { return run_fit(job, progress); }) {
    server.set_payload_max_length(config.max_upload_bytes);
    routes();
  }

  StylePreset run_fit(Job& job, const FitProgressCallback& progress) {
    std::vector<RasterImage> images;
    std::vector<fs::path> files;
    for (const auto& id : job.reference_ids) {
      files.push_back(references.path_for(id));
      images.push_back(load_image(files.back()));
    }
    FitResult r = fit_style(images, job.config, {}, progress);
    r.preset.name = job.save_as.value_or("fitted");
    r.preset.created_at = reproducible_created_at(files);
    if (job.save_as) presets.put(r.preset, false);
    return r.preset;
  }

  void routes() {
    server.Get("/healthz", guarded([](const auto&, auto& res) {
      send_json(res, 200, json{{"status", "ok"}});
    }));

    server.Post("/api/references", guarded([this](const httplib::Request& req, auto& res) {
      std::string bytes;
      if (req.is_multipart_form_data()) {
        const auto* part = find_part(req, "image");
        if (!part && !req.files.empty()) part = &req.files.begin()->second;
        if (!part) bad_request("multipart upload needs an \"image\" part");
        bytes = part->content;
      } else {
        bytes = req.body;
      }
      if (bytes.empty()) bad_request("empty upload");
      auto [id, decoded] = references.add(bytes);
      send_json(res, 201,
                json{{"reference_id", id},
                     {"width", decoded.image.width()},
                     {"height", decoded.image.height()},
                     {"format", decoded.format == ImageFormat::Png ? "png" : "jpeg"},
                     {"bit_depth", decoded.bit_depth}});
    }));

    server.Get(R"(/api/stats/([^/]+))", guarded([this](const httplib::Request& req, auto& res) {
      const DecodedImage img = references.load(req.matches[1]);
      res.status = 200;
      res.set_content(stats_json(concept_stats(img.image)), "application/json");
    }));

    server.Post("/api/fit", guarded([this](const httplib::Request& req, auto& res) {
      const json body = parse_body(req.body);
      reject_unknown(body, "fit request", {"reference_ids", "config", "save_as"});
      if (!body.contains("reference_ids") || !body["reference_ids"].is_array() ||
          body["reference_ids"].empty()) {
        bad_request("reference_ids must be a non-empty array");
      }
      auto job = std::make_shared<Job>();
      for (const auto& id : body["reference_ids"]) {
        if (!id.is_string()) bad_request("reference_ids entries must be strings");
        references.path_for(id.get<std::string>());
        job->reference_ids.push_back(id.get<std::string>());
      }
      job->config = fit_config_from(body.contains("config") ? body["config"] : json(nullptr));
      if (body.contains("save_as") && !body["save_as"].is_null()) {
        if (!body["save_as"].is_string()) bad_request("save_as must be a string");
        const std::string name = body["save_as"].get<std::string>();
        if (!valid_preset_name(name)) bad_request("invalid preset name '" + name + "'");
        if (presets.get_json(name)) {
          throw Error(ErrorCode::Conflict, "preset '" + name + "' already exists");
        }
        job->save_as = name;
      }
      send_json(res, 202, json{{"job_id", jobs.submit(std::move(job))}});
    }));

    server.Get(R"(/api/fit/([^/]+))", guarded([this](const httplib::Request& req, auto& res) {
      const auto view = jobs.view(req.matches[1]);
      if (!view) throw Error(ErrorCode::NotFound, "unknown job id '" + std::string(req.matches[1]) + "'");
      send_json(res, 200, *view);
    }));

    server.Get("/api/presets", guarded([this](const auto&, auto& res) {
      send_json(res, 200, json{{"presets", presets.names()}});
    }));

    server.Get(R"(/api/presets/([^/]+))", guarded([this](const httplib::Request& req, auto& res) {
      const auto stored = presets.get_json(req.matches[1]);
      if (!stored) throw Error(ErrorCode::NotFound, "unknown preset '" + std::string(req.matches[1]) + "'");
      res.status = 200;
      res.set_content(*stored, "application/json");
    }));

    server.Put(R"(/api/presets/([^/]+))", guarded([this](const httplib::Request& req, auto& res) {
      const std::string name = req.matches[1];
      if (!valid_preset_name(name)) bad_request("invalid preset name '" + name + "'");
      StylePreset preset = decode_preset(req.body);
      if (preset.name != name) bad_request("preset name does not match the path");
      const bool overwrite = req.has_param("overwrite") && req.get_param_value("overwrite") == "true";
      const bool replaced = presets.put(preset, overwrite);
      res.status = replaced ? 200 : 201;
      res.set_content(*presets.get_json(name), "application/json");
    }));

    server.Delete(R"(/api/presets/([^/]+))", guarded([this](const httplib::Request& req, auto& res) {
      if (!presets.remove(req.matches[1])) {
        throw Error(ErrorCode::NotFound, "unknown preset '" + std::string(req.matches[1]) + "'");
      }
      res.status = 204;
    }));

    server.Post("/api/render", guarded([this](const httplib::Request& req, auto& res) {
      if (!req.is_multipart_form_data()) bad_request("render expects multipart form data");
      const auto* image = find_part(req, "image");
      if (!image) bad_request("render needs an \"image\" part");
      json options = json::object();
      if (const auto* part = find_part(req, "options")) options = parse_body(part->content);
      render(image->content, options, res);
    }));
  }

  void render(const std::string& bytes, const json& options, httplib::Response& res) {
    reject_unknown(options, "render options",
                   {"preset_name", "params", "mode", "concepts", "overrides", "full"});
    StylePreset preset;
    preset.params = neutral_params();
    if (options.contains("preset_name") && options.contains("params")) {
      bad_request("give either preset_name or params, not both");
    }
    if (options.contains("preset_name")) {
      if (!options["preset_name"].is_string()) bad_request("preset_name must be a string");
      const std::string name = options["preset_name"].get<std::string>();
      auto stored = presets.get(name);
      if (!stored) throw Error(ErrorCode::NotFound, "unknown preset '" + name + "'");
      preset = std::move(*stored);
    } else if (options.contains("params")) {
      preset.params = decode_params(options["params"].dump());
    }

    ApplyMode mode = ApplyMode::Absolute;
    if (options.contains("mode")) {
      const auto m = options["mode"].is_string()
                         ? mode_from_name(options["mode"].get<std::string>())
                         : std::nullopt;
      if (!m) bad_request("mode must be \"absolute\" or \"relative\"");
      mode = *m;
    }

    ConceptMask mask = ConceptMask::all();
    if (options.contains("concepts")) {
      if (!options["concepts"].is_array()) bad_request("concepts must be an array of names");
      mask = ConceptMask::none();
      for (const auto& c : options["concepts"]) {
        if (!c.is_string()) bad_request("concepts must be an array of names");
        mask.insert(concept_or_400(c.get<std::string>()));
      }
    }

    if (options.contains("overrides")) {
      const json& ov = options["overrides"];
      if (!ov.is_object()) bad_request("overrides must be an object");
      for (const auto& [name, value] : ov.items()) {
        const ConceptId id = concept_or_400(name);
        preset.params.set(id, concept_value_from(id, value));
      }
      preset.params.validate();
    }

    bool full = false;
    if (options.contains("full")) {
      if (!options["full"].is_boolean()) bad_request("full must be a boolean");
      full = options["full"].get<bool>();
    }

    DecodedImage content = decode_image(
        std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
    if (!full) content.image = downsample_long_edge(content.image, config.preview_long_edge);
    const RasterImage out = apply_style(content.image, preset, mode, mask);
    const auto png = encode_png(out, content.bit_depth);
    res.status = 200;
    res.set_content(std::string(png.begin(), png.end()), "image/png");
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Service::~Service() { stop(); }

int Service::bind() {
  const auto& c = impl_->config;
  if (c.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(c.host);
  } else {
    impl_->port = impl_->server.bind_to_port(c.host, c.port) ? c.port : -1;
  }
  if (impl_->port < 0) {
    throw Error(ErrorCode::Io, "cannot bind " + c.host + ":" + std::to_string(c.port));
  }
  return impl_->port;
}

void Service::serve() { impl_->server.listen_after_bind(); }

int Service::start() {
  const int port = bind();
  impl_->thread = std::thread([this] { serve(); });
  impl_->server.wait_until_ready();
  return port;
}

void Service::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  impl_->jobs.shutdown();
}

}  // namespace pif
