// Acceptance suite: one PASS/FAIL line per criterion.
//
//   pif_acceptance [--pif PATH] [--only NAME[,NAME...]] [--strict] [--report FILE]
//
// Exits 0 once every selected criterion has produced a verdict; --strict exits 1
// when any verdict is FAIL.

#include <sys/wait.h>
#include <signal.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "live_service.hpp"
#include "oracles.hpp"
#include "pif/concepts.hpp"
#include "pif/error.hpp"
#include "pif/fit.hpp"
#include "pif/image_io.hpp"
#include "pif/metrics.hpp"
#include "pif/pcturb.hpp"
#include "raw_codecs.hpp"
#include "scenes.hpp"

using namespace pif;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

class Checker {
 public:
  void check(bool ok, const std::string& what) {
    ++total_;
    if (!ok) failures_.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    check(std::fabs(got - want) <= tol, what + ": got " + fmt("%.9g", got) + ", want " +
                                            fmt("%.9g", want) + " +- " + fmt("%g", tol));
  }
  template <class Fn>
  void throws(ErrorCode code, Fn&& fn, const std::string& what) {
    try {
      fn();
    } catch (const Error& e) {
      check(e.code() == code, what + ": wrong error code " + to_string(e.code()));
      return;
    }
    check(false, what + ": no error");
  }
  void note(const std::string& line) { notes_.push_back(line); }

  int total() const { return total_; }
  const std::vector<std::string>& failures() const { return failures_; }
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  int total_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

double max_abs_diff(const RasterImage& a, const RasterImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.samples().size(); ++i) {
    m = std::max(m, std::fabs(a.samples()[i] - b.samples()[i]));
  }
  return m;
}

bool all_pixels(const RasterImage& img, Rgb v, double tol) {
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      const Rgb p = img.pixel(x, y);
      for (int c = 0; c < 3; ++c) {
        if (std::fabs(p[c] - v[c]) > tol) return false;
      }
    }
  }
  return true;
}

double circ(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

RasterImage two_tone(std::size_t w, std::size_t h, double lo, double hi) {
  RasterImage img(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double v = x < w / 2 ? lo : hi;
      img.set_pixel(x, y, {v, v, v});
    }
  }
  return img;
}

RasterImage shifted(const RasterImage& img, double d) {
  RasterImage out = img;
  for (double& v : out.samples()) v += d;
  return out;
}

RasterImage decode_body(const std::string& body) {
  return decode_image(std::span(reinterpret_cast<const std::uint8_t*>(body.data()), body.size())).image;
}

// Runs a command; returns its exit status.
int run_process(const std::vector<std::string>& args) {
  const pid_t pid = fork();
  if (pid == 0) {
    std::vector<char*> argv;
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    const int devnull = ::open("/dev/null", 1);
    if (devnull >= 0) dup2(devnull, 1);
    execv(argv[0], argv.data());
    _exit(127);
  }
  int status = 0;
  waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string pif_binary;

// ---------------------------------------------------------------------------

void formula_oracles(Checker& c) {
  const auto t0 = Clock::now();
  testing::ScratchDir tmp("pif-acc");

  // Decoding and quantization.
  c.check(decode_image(testing::raw_png_row({255, 128, 0}, 8)).image.pixel(0, 0) == Rgb{1.0, 128.0 / 255.0, 0.0},
          "8-bit PNG (255,128,0)");
  c.check(decode_image(testing::raw_png_row({65535, 0, 0}, 16)).image.pixel(0, 0) == Rgb{1.0, 0.0, 0.0},
          "16-bit PNG (65535,0,0)");
  {
    const auto png = testing::raw_png_row({1, 2, 3, 4, 5, 6, 7, 8, 9}, 8);
    const std::vector<std::uint8_t> cut(png.begin(), png.begin() + static_cast<long>(png.size() - 20));
    c.throws(ErrorCode::Decode, [&] { decode_image(cut); }, "truncated PNG");
  }
  {
    const RasterImage half(17, 9, Rgb{0.5, 0.5, 0.5});
    save_image(half, tmp.path / "half.png", 16);
    c.check(max_abs_diff(load_image(tmp.path / "half.png"), half) <= 1.0 / 65535.0, "16-bit round trip bound");
    const RasterImage rnd = testing::random_image(11, 31, 23);
    save_image(rnd, tmp.path / "rnd.png", 8);
    c.check(max_abs_diff(load_image(tmp.path / "rnd.png"), rnd) <= 1.0 / 255.0, "8-bit round trip bound");
    c.throws(ErrorCode::Io, [&] { save_image(rnd, tmp.path / "missing" / "x.png", 8); }, "save into missing dir");
  }

  // Color conversion.
  {
    const auto red = rgb_to_hsv({1, 0, 0});
    c.near(red[0], 0.0, 1e-6, "hsv(1,0,0).h");
    c.near(red[1], 1.0, 1e-6, "hsv(1,0,0).s");
    c.near(red[2], 1.0, 1e-6, "hsv(1,0,0).v");
    c.check(rgb_to_hsv({0.5, 0.5, 0.5}) == std::array<double, 3>{0.0, 0.0, 0.5}, "hsv(gray)");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double h = u(rng), s = u(rng), v = u(rng);
      const auto back = rgb_to_hsv(hsv_to_rgb(h, s, v));
      if (s > 0.0 && v > 0.0) worst = std::max(worst, circ(back[0], h));
      if (v > 0.0) worst = std::max(worst, std::fabs(back[1] - s));
      worst = std::max(worst, std::fabs(back[2] - v));
    }
    c.check(worst <= 1e-6, "HSV round trip on 1000 pixels, worst " + fmt("%.3g", worst));
  }

  // Luminance.
  c.check(luminance(RasterImage(2, 2, Rgb{1, 1, 1}))[0] == 1.0, "luminance(white)");
  c.check(luminance(RasterImage(2, 2, Rgb{0, 0, 0}))[0] == 0.0, "luminance(black)");
  c.near(luminance(RasterImage(1, 1, Rgb{1, 0, 0}))[0], 0.2126, 1e-6, "luminance(red)");

  // Blur.
  {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool exact = true;
    for (int t = 0; t < 20; ++t) {
      const RasterImage flat(10, 8, Rgb{u(rng), u(rng), u(rng)});
      for (int k : {1, 3, 5, 11, 21}) exact = exact && gaussian_blur(flat, k) == flat;
    }
    c.check(exact, "blur of constant images");
    const RasterImage noise = testing::random_image(5, 13, 11);
    c.check(gaussian_blur(noise, 1) == noise, "kernel size 1 is identity");
    RasterImage impulse(5, 5);
    impulse.set_pixel(2, 2, {1, 1, 1});
    const RasterImage out = gaussian_blur(impulse, 3);
    // Direct 2-D convolution with explicitly sampled taps, sigma = (k - 1) / 6.
    const double sigma = (3 - 1) / 6.0;
    double w1[3], norm = 0;
    for (int k = -1; k <= 1; ++k) norm += w1[k + 1] = std::exp(-(k * k) / (2 * sigma * sigma));
    for (double& w : w1) w /= norm;
    double worst = 0;
    for (int y = 0; y < 5; ++y) {
      for (int x = 0; x < 5; ++x) {
        double expect = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int sx = std::clamp(x + dx, 0, 4), sy = std::clamp(y + dy, 0, 4);
            expect += w1[dy + 1] * w1[dx + 1] * impulse.pixel(sx, sy)[0];
          }
        }
        worst = std::max(worst, std::fabs(out.pixel(x, y)[0] - expect));
      }
    }
    c.check(worst <= 1e-6, "impulse blur vs direct convolution");
    c.near(out.pixel(2, 2)[0], w1[1] * w1[1], 1e-6, "impulse center weight");
  }

  // Gradient.
  {
    c.check(gradient_magnitude(RasterImage(7, 5, Rgb{0.4, 0.4, 0.4})).max() == 0.0, "gradient of constant");
    RasterImage ramp(12, 4);
    const double slope = 0.05;
    for (std::size_t y = 0; y < 4; ++y) {
      for (std::size_t x = 0; x < 12; ++x) ramp.set_pixel(x, y, Rgb{0.1 + slope * x, 0.1 + slope * x, 0.1 + slope * x});
    }
    const ScalarField g = gradient_magnitude(ramp);
    double worst = 0;
    for (std::size_t y = 0; y < 4; ++y) {
      for (std::size_t x = 1; x < 11; ++x) worst = std::max(worst, std::fabs(g.at(x, y) - slope));
    }
    c.check(worst <= 1e-6, "ramp interior gradient");
    RasterImage column(1, 6);
    for (std::size_t y = 0; y < 6; ++y) column.set_pixel(0, y, {0.5, 0.5, 0.5});
    c.check(gradient_magnitude(column).max() == 0.0, "1-pixel-wide gradient");
  }

  // Concept adjustments.
  {
    c.check(all_pixels(adjust(ConceptId::Exposure, RasterImage(4, 4, Rgb{0.4, 0.4, 0.4}), Scalar{0.5}), {0.6, 0.6, 0.6}, 1e-6),
            "exposure 0.4 -> 0.6");
    c.check(all_pixels(adjust(ConceptId::Exposure, RasterImage(4, 4, Rgb{0.8, 0.8, 0.8}), Scalar{0.5}), {1, 1, 1}, 1e-4),
            "exposure 0.8 -> 1.0 clamped");
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool sharp_exact = true, sat_exact = true;
    for (int t = 0; t < 20; ++t) {
      const RasterImage flat(12, 9, Rgb{u(rng), u(rng), u(rng)});
      sharp_exact = sharp_exact && adjust(ConceptId::Sharpness, flat, Scalar{2 * u(rng) - 1}) == flat;
      RasterImage gray = testing::random_image(t, 10, 8);
      for (std::size_t y = 0; y < 8; ++y) {
        for (std::size_t x = 0; x < 10; ++x) {
          const double v = gray.pixel(x, y)[0];
          gray.set_pixel(x, y, {v, v, v});
        }
      }
      sat_exact = sat_exact && adjust(ConceptId::Saturation, gray, Scalar{2 * u(rng) - 1}) == gray;
    }
    c.check(sharp_exact, "sharpness of constant images");
    c.check(sat_exact, "saturation of grayscale images");
    const RasterImage con = adjust(ConceptId::Contrast, two_tone(8, 4, 0.2, 0.8), Scalar{1.0});
    c.near(con.pixel(0, 0)[0], 0.0, 1e-4, "contrast low side");
    c.near(con.pixel(7, 0)[0], 1.0, 1e-4, "contrast high side");

    const RasterImage colorful = testing::textured_scene(2, 32, 24);
    const RasterImage full_tint = adjust(ConceptId::Tint, colorful, StrengthHue{1.0, 0.37});
    double worst = 0;
    for (std::size_t y = 0; y < 24; ++y) {
      for (std::size_t x = 0; x < 32; ++x) {
        const auto hsv = rgb_to_hsv(full_tint.pixel(x, y));
        if (hsv[1] > 1e-3) worst = std::max(worst, circ(hsv[0], 0.37));
      }
    }
    c.check(worst <= 1e-6, "tint strength 1 sets every hue, worst " + fmt("%.3g", worst));
    const RasterImage px(1, 1, hsv_to_rgb(0.9, 0.5, 0.6));
    c.near(circ(rgb_to_hsv(adjust(ConceptId::Tint, px, StrengthHue{0.5, 0.1}).pixel(0, 0))[0], 0.0), 0.0, 1e-6,
           "tint across the wrap point");

    RasterImage dim(4, 4, Rgb{0.5, 0.6, 0.4});
    c.check(adjust(ConceptId::Highlight, dim, StrengthHue{0.9, 0.3}) == dim, "highlight below threshold");
    const RasterImage white(3, 3, Rgb{1, 1, 1});
    c.check(all_pixels(adjust(ConceptId::Highlight, white, StrengthHue{1.0, 0.08}), highlight_color(0.08), 1e-6),
            "highlight on white equals c(0.08)");
    bool neutral = true;
    for (ConceptId id : kAllConcepts) {
      neutral = neutral && adjust(id, colorful, neutral_params().get(id)) == colorful;
    }
    c.check(neutral, "neutral value of every concept");
  }

  // Weight maps.
  {
    const RasterImage img = testing::textured_scene(1, 30, 20);
    const ScalarField w2 = raw_weight_map(ConceptId::Vignetting, img);
    c.near(w2.at(0, 0), 1.0, 1e-6, "W2 corner");
    c.check(w2.at(15, 10) == 0.0, "W2 center");
    const ScalarField w4 = raw_weight_map(ConceptId::Tint, img);
    c.check(w4.min() == 1.0 && w4.max() == 1.0, "W4 all ones");
    c.near(raw_weight_map(ConceptId::Highlight, RasterImage(2, 2, Rgb{0.85, 0.85, 0.85}))[0], 0.5, 1e-6, "W7 at 0.85");
    c.check(raw_weight_map(ConceptId::Exposure, RasterImage(5, 5, Rgb{0.3, 0.3, 0.3})).max() == 0.0, "W5 of constant");
  }

  // Params.
  {
    c.check(perturb(testing::textured_scene(3, 20, 16), neutral_params()) == testing::textured_scene(3, 20, 16),
            "neutral perturb");
    c.check(std::get<StrengthHue>(neutral_params().get(ConceptId::Tint)).strength == 0.0, "neutral tint strength");
    c.check(decode_params(encode_params(neutral_params())) == neutral_params(), "neutral params round trip");
  }

  // Composition and masks.
  {
    const RasterImage img = testing::textured_scene(4, 24, 18);
    ConceptParams only;
    only.exposure = -0.35;
    c.check(perturb(img, only) == adjust(ConceptId::Exposure, img, Scalar{-0.35}), "perturb with exposure only");
    ConceptParams both;
    both.exposure = 0.5;
    both.contrast = 1.0;
    const RasterImage staged = adjust(ConceptId::Exposure, two_tone(8, 4, 0.2, 0.8), Scalar{0.5});
    c.near(staged.pixel(0, 0)[0], 0.3, 1e-6, "exposure stage low");
    c.near(staged.pixel(7, 0)[0], 1.0, 1e-4, "exposure stage high (clamped)");
    c.near(luminance(staged).mean(), 0.65, 1e-4, "exposure stage mean");
    const RasterImage composed = perturb(two_tone(8, 4, 0.2, 0.8), both);
    c.near(composed.pixel(0, 0)[0], 0.0, 1e-4, "composition low");
    c.near(composed.pixel(7, 0)[0], 1.0, 1e-4, "composition high");
    ConceptParams multi;
    multi.exposure = 0.3;
    multi.tint = {0.8, 0.4};
    c.check(perturb_masked(img, multi, ConceptMask::none()) == img, "empty mask");
    c.check(perturb_masked(img, multi, ConceptMask::all()) == perturb(img, multi), "full mask");
    c.check(perturb_masked(img, multi, {ConceptId::Exposure}) == adjust(ConceptId::Exposure, img, Scalar{0.3}),
            "exposure-only mask");
  }

  // Neutralization.
  {
    const RasterImage target = two_tone(8, 4, 0.32, 0.68);
    c.check(max_abs_diff(neutralize(target), target) <= 1e-4, "neutralize fixed point");
    c.throws(ErrorCode::DegenerateImage, [] { neutralize(RasterImage(4, 4, Rgb{0.2, 0.2, 0.2})); }, "neutralize constant");
    double worst = 0;
    for (std::uint32_t v = 0; v < 6; ++v) {
      const RasterImage once = neutralize(testing::textured_scene(v, 128, 96));
      const RasterImage twice = neutralize(once);
      double mad = 0;
      for (std::size_t i = 0; i < once.samples().size(); ++i) mad += std::fabs(once.samples()[i] - twice.samples()[i]);
      worst = std::max(worst, mad / static_cast<double>(once.samples().size()));
    }
    c.check(worst <= 2e-2, "neutralize idempotence, worst " + fmt("%.3g", worst));
  }

  // Apply style.
  {
    const RasterImage content = testing::textured_scene(5, 64, 48);
    StylePreset neutral;
    c.check(apply_style(content, neutral, ApplyMode::Relative) == content, "neutral relative");
    c.check(apply_style(content, neutral, ApplyMode::Absolute) == neutralize(content), "neutral absolute");
    StylePreset bright;
    bright.params.exposure = 0.3;
    // Mid-range content already at mean luminance 0.5: no pixel clamps under x1.3.
    const RasterImage mid = two_tone(8, 4, 0.32, 0.68);
    c.near(luminance(apply_style(mid, bright, ApplyMode::Absolute)).mean(), 0.65, 1e-4, "absolute exposure 0.3");
  }

  // Codec.
  {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool ok = true;
    for (int t = 0; t < 20; ++t) {
      StylePreset p;
      p.name = "p" + std::to_string(t);
      p.created_at = format_rfc3339(1600000000 + t * 977);
      p.params.sharpness = 2 * u(rng) - 1;
      p.params.vignetting = 2 * u(rng) - 1;
      p.params.saturation = 2 * u(rng) - 1;
      p.params.exposure = 2 * u(rng) - 1;
      p.params.contrast = 2 * u(rng) - 1;
      p.params.tint = {u(rng), u(rng)};
      p.params.highlight = {u(rng), u(rng)};
      p.params.shadow = {u(rng), u(rng)};
      ok = ok && decode_preset(encode_preset(p)) == p;
    }
    c.check(ok, "preset round trip");
    StylePreset p;
    p.name = "x";
    p.created_at = format_rfc3339(0);
    std::string bad = encode_preset(p);
    bad.replace(bad.find("\"exposure\":0.0"), 14, "\"exposure\":1.5");
    c.throws(ErrorCode::OutOfRange, [&] { decode_preset(bad); }, "exposure 1.5");
    std::string nov = encode_preset(p);
    nov.erase(1, nov.find(',') );
    c.throws(ErrorCode::Schema, [&] { decode_preset(nov); }, "missing version");
  }

  // Loss features and values.
  {
    const auto white = concept_feature(ConceptId::Exposure, RasterImage(4, 4, Rgb{1, 1, 1}));
    c.check(white.size() == 1 && white[0].min() == 1.0 && white[0].max() == 1.0, "exposure feature of white");
    const auto tint = concept_feature(ConceptId::Tint, RasterImage(4, 4, Rgb{0.4, 0.4, 0.4}));
    c.check(tint.size() == 2 && tint[0].max() == 0.0 && tint[0].min() == 0.0 && tint[1].max() == 0.0 && tint[1].min() == 0.0,
            "tint feature of gray");
    const auto sat = concept_feature(ConceptId::Saturation, RasterImage(4, 4, hsv_to_rgb(0.2, 0.4, 0.8)));
    c.check(sat.size() == 1 && std::fabs(sat[0].min() - 0.4) <= 1e-12 && std::fabs(sat[0].max() - 0.4) <= 1e-12,
            "saturation feature");
    const RasterImage a = testing::textured_scene(6, 40, 30);
    bool zero = true;
    for (unsigned bits = 0; bits < 256; bits += 17) zero = zero && weighted_loss(a, a, ConceptMask::from_bits(bits)) == 0.0;
    c.check(zero, "loss of identical images");
    c.check(weighted_loss(a, a, ConceptMask::none()) == 0.0, "empty subset");
    c.check(weighted_loss(RasterImage(6, 6, Rgb{0.6, 0.6, 0.6}), RasterImage(6, 6, Rgb{0.5, 0.5, 0.5}),
                          {ConceptId::Exposure}) == 0.0,
            "constant exposure loss");
  }

  // Progress callback.
  {
    ConceptParams truth;
    truth.exposure = 0.2;
    const std::vector<RasterImage> refs{perturb(testing::textured_anchor(0, 64, 48), truth)};
    FitConfig one;
    one.max_outer_iterations = 1;
    one.downsample_long_edge = 64;
    int emissions = 0;
    fit_style(refs, one, {}, [&](const FitProgress&) { ++emissions; });
    c.check(emissions >= 1, "1-iteration cap emits");
    FitConfig few = one;
    few.max_outer_iterations = 12;
    std::vector<std::pair<int, double>> seen;
    const auto tid = std::this_thread::get_id();
    bool same = true;
    const FitResult r = fit_style(refs, few, {}, [&](const FitProgress& p) {
      seen.emplace_back(p.iteration, p.loss);
      same = same && std::this_thread::get_id() == tid;
    });
    c.check(seen == r.report.loss_history, "emissions match loss history");
    c.check(same, "callback runs on the fitting thread");
  }

  // Metrics.
  {
    RasterImage a = testing::random_image(9, 40, 30);
    for (double& v : a.samples()) v = 0.05 + 0.8 * v;
    c.check(psnr(a, a) == 99.0, "psnr identical");
    c.near(psnr(a, shifted(a, 0.1)), 20.0, 1e-6, "psnr +0.1");
    c.near(psnr(a, shifted(a, 0.01)), 40.0, 1e-6, "psnr +0.01");
    const RasterImage t = testing::textured_scene(0, 48, 40);
    c.check(ssim(t, t) == 1.0, "ssim identical");
    const RasterImage k = RasterImage(16, 16, Rgb{0.3, 0.3, 0.3});
    c.check(ssim(k, k) == 1.0, "ssim constant");
    const RasterImage b1 = testing::checkerboard(32, 32, 2, 0.0, 1.0);
    const RasterImage b2 = testing::checkerboard(32, 32, 2, 1.0, 0.0);
    const double s = ssim(b1, b2);
    c.check(s < 0.0, "ssim checkerboard negative");
    c.near(s, testing::ssim_direct(b1, b2), 1e-6, "ssim checkerboard vs windowed oracle");
    c.check(histogram(RasterImage(3, 3, Rgb{0, 0, 0}), HistogramChannel::Luminance).bins[0] == 1.0, "histogram of 0");
    c.check(histogram(RasterImage(3, 3, Rgb{1, 1, 1}), HistogramChannel::Luminance).bins[255] == 1.0, "histogram of 1");
    RasterImage tt(4, 2);
    for (std::size_t x = 0; x < 4; ++x) {
      tt.set_pixel(x, 0, {0.25, 0.25, 0.25});
      tt.set_pixel(x, 1, {0.75, 0.75, 0.75});
    }
    const Histogram h = histogram(tt, HistogramChannel::Red);
    c.check(h.bins[64] == 0.5 && h.bins[192] == 0.5, "two-tone bins");
    Histogram p10, p20, split, left;
    p10.bins[10] = 1;
    p20.bins[20] = 1;
    split.bins[0] = split.bins[255] = 0.5;
    left.bins[0] = 1;
    c.check(emd(p10, p10) == 0.0, "emd identical");
    c.near(emd(p10, p20), 10.0 / 256.0, 1e-9, "emd shift of 10 bins");
    c.near(emd(split, left), 0.5 * 255.0 / 256.0, 1e-9, "emd split mass");
    c.check(emd_image(a, a) == 0.0, "emd_image identical");
    c.near(emd_image(a, shifted(a, 0.1)), 0.1, 1.0 / 256.0, "emd_image shift");
    RasterImage gray(16, 16), moved(16, 16);
    for (std::size_t y = 0; y < 16; ++y) {
      for (std::size_t x = 0; x < 16; ++x) {
        const double d = x % 2 ? 0.1 : 0.0;
        gray.set_pixel(x, y, {0.502, 0.502, 0.502});
        moved.set_pixel(x, y, {0.502 + d, 0.502, 0.502 - d * 0.2126 / 0.0722});
      }
    }
    c.check(emd(histogram(gray, HistogramChannel::Luminance), histogram(moved, HistogramChannel::Luminance)) <= 1e-12 &&
                emd(histogram(gray, HistogramChannel::Red), histogram(moved, HistogramChannel::Red)) > 0.0,
            "luminance-preserving color change");
    const ConceptStats flat = concept_stats(RasterImage(8, 8, Rgb{0.5, 0.5, 0.5}));
    c.check(flat.mean_luminance == 0.5 && flat.luminance_std == 0.0 && flat.mean_saturation == 0.0, "stats of gray");
    c.check(flat.edge_energy == 0.0, "edge energy of constant");
    ConceptParams vig;
    vig.vignetting = -0.5;
    const ConceptStats vs = concept_stats(perturb(RasterImage(40, 30, Rgb{0.5, 0.5, 0.5}), vig));
    c.check(vs.vignetting_ratio && *vs.vignetting_ratio < 1.0, "vignetting ratio below one");
  }

  // CLI mappings, in-process through the installed binary.
  if (!pif_binary.empty()) {
    const RasterImage content = testing::textured_scene(7, 48, 36);
    save_image(content, tmp.path / "c.png", 8);
    const RasterImage loaded = load_image(tmp.path / "c.png");
    c.check(run_process({pif_binary, "perturb", "--in", (tmp.path / "c.png").string(), "--out",
                         (tmp.path / "p.png").string(), "--set", "exposure=0.3", "--set", "tint=0.5:0.66"}) == 0,
            "cli perturb runs");
    ConceptParams p;
    p.exposure = 0.3;
    p.tint = {0.5, 0.66};
    c.check(max_abs_diff(load_image(tmp.path / "p.png"), perturb(loaded, p)) <= 0.5 / 255.0 + 1e-12,
            "cli perturb matches library");
    StylePreset preset;
    preset.name = "look";
    preset.created_at = format_rfc3339(0);
    preset.params.tint = {0.4, 0.2};
    preset.params.contrast = 0.3;
    preset.params.saturation = -0.5;
    std::ofstream(tmp.path / "look.json") << encode_preset(preset);
    c.check(run_process({pif_binary, "apply", "--preset", (tmp.path / "look.json").string(), "--in",
                         (tmp.path / "c.png").string(), "--out", (tmp.path / "d.png").string(), "--concepts",
                         "tint,contrast", "--mode", "relative"}) == 0,
            "cli apply runs");
    const RasterImage masked = perturb_masked(loaded, preset.params, {ConceptId::Tint, ConceptId::Contrast});
    c.check(max_abs_diff(load_image(tmp.path / "d.png"), masked) <= 0.5 / 255.0 + 1e-12, "cli apply matches perturb_masked");
    c.check(evaluate_pair(loaded, loaded).psnr == 99.0 &&
                run_process({pif_binary, "eval", "--a", (tmp.path / "c.png").string(), "--b", (tmp.path / "c.png").string()}) == 0,
            "cli eval identical");
  } else {
    c.check(false, "pif binary not given (--pif)");
  }

  const double elapsed = seconds_since(t0);
  c.check(elapsed < 10.0, "runtime " + fmt("%.1f s", elapsed) + " under 10 s");
  c.note(fmt("runtime %.1f s", elapsed));
}

void identity_composition(Checker& c) {
  const auto t0 = Clock::now();
  int identity_ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RasterImage img = testing::random_image(1000 + seed, 37 + seed, 23 + 2 * seed);
    identity_ok += perturb(img, neutral_params()) == img;
  }
  c.check(identity_ok == 20, "neutral identity on " + std::to_string(identity_ok) + "/20 images");
  const RasterImage img = testing::textured_scene(9, 64, 64);
  ConceptParams p;
  p.sharpness = 0.4;
  p.vignetting = -0.3;
  p.saturation = 0.5;
  p.tint = {0.35, 0.62};
  p.exposure = -0.2;
  p.contrast = 0.45;
  p.highlight = {0.5, 0.1};
  p.shadow = {0.6, 0.55};
  int masks_ok = 0;
  for (unsigned bits = 0; bits < 256; ++bits) {
    const ConceptMask m = ConceptMask::from_bits(bits);
    masks_ok += perturb_masked(img, p, m) == perturb(img, restrict_params(p, m));
  }
  c.check(masks_ok == 256, "masked equals restricted on " + std::to_string(masks_ok) + "/256 masks");
  const double elapsed = seconds_since(t0);
  c.check(elapsed < 30.0, "runtime " + fmt("%.1f s", elapsed) + " under 30 s");
  c.note(fmt("runtime %.1f s", elapsed));
}

void weight_maps(Checker& c) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> dim(1, 160);
  for (int t = 0; t < 10; ++t) {
    // Even sizes so that the exact center is a pixel.
    const std::size_t w = 2 * static_cast<std::size_t>(dim(rng));
    const std::size_t h = 2 * static_cast<std::size_t>(dim(rng));
    const RasterImage img = testing::textured_scene(static_cast<std::uint32_t>(t), w, h);
    const ScalarField w2 = raw_weight_map(ConceptId::Vignetting, img);
    const std::string tag = std::to_string(w) + "x" + std::to_string(h);
    c.check(w2.at(0, 0) == 1.0, "W2 corner at " + tag);
    c.check(w2.at(w / 2, h / 2) == 0.0, "W2 center at " + tag);
    for (ConceptId id : kAllConcepts) {
      const ScalarField m = weight_map(id, img);
      c.check(m.min() >= 0.0 && m.max() <= 1.0, std::string(concept_name(id)) + " map in [0,1] at " + tag);
    }
    const ScalarField w4 = weight_map(ConceptId::Tint, img);
    c.check(w4.min() == 1.0 && w4.max() == 1.0, "W4 all ones at " + tag);
  }
}

struct RecoveryCase {
  ConceptId id;
  double xi;
};

void style_recovery(Checker& c) {
  const auto t0 = Clock::now();
  const RasterImage anchor = testing::textured_anchor(0);
  const std::vector<RasterImage> anchors{anchor};
  static const ConceptId kScalars[] = {ConceptId::Sharpness, ConceptId::Vignetting, ConceptId::Saturation,
                                       ConceptId::Exposure, ConceptId::Contrast};
  int passed = 0, cases = 0;
  for (ConceptId id : kScalars) {
    for (double xi : {-0.4, -0.2, 0.2, 0.4}) {
      ConceptParams truth;
      truth.set(id, Scalar{xi});
      const std::vector<RasterImage> refs{perturb(anchor, truth)};
      const auto t1 = Clock::now();
      const FitResult r = fit_style_with_anchors(refs, anchors);
      double active_err = 0.0, passive_err = 0.0;
      std::string worst_passive;
      for (ConceptId other : kScalars) {
        const double got = std::get<Scalar>(r.preset.params.get(other)).xi;
        if (other == id) {
          active_err = std::fabs(got - xi);
        } else if (std::fabs(got) > passive_err) {
          passive_err = std::fabs(got);
          worst_passive = std::string(concept_name(other));
        }
      }
      const bool ok = active_err <= 0.05 && passive_err <= 0.05;
      ++cases;
      passed += ok;
      c.check(ok, std::string(concept_name(id)) + fmt(" %+.1f", xi) + fmt(": active error %.3f", active_err) +
                      fmt(", worst passive %.3f", passive_err) + " (" + worst_passive + ")");
      c.note(std::string(ok ? "ok   " : "miss ") + std::string(concept_name(id)) + fmt(" %+.1f", xi) +
             fmt(" -> %+.3f", std::get<Scalar>(r.preset.params.get(id)).xi) +
             fmt(", worst passive %.3f", passive_err) + fmt(", %.1f s", seconds_since(t1)));
    }
  }
  c.note("scalar cases passed: " + std::to_string(passed) + "/" + std::to_string(cases));

  {
    ConceptParams truth;
    truth.tint = {0.5, 0.66};
    const std::vector<RasterImage> refs{perturb(anchor, truth)};
    const FitResult r = fit_style_with_anchors(refs, anchors);
    const StrengthHue got = r.preset.params.tint;
    const bool ok = std::fabs(got.strength - 0.5) <= 0.08 && circ(got.hue, 0.66) <= 0.05;
    c.check(ok, fmt("tint recovered strength %.3f", got.strength) + fmt(" hue %.3f", got.hue));
    c.note(std::string(ok ? "ok   " : "miss ") + fmt("tint 0.5@0.66 -> %.3f", got.strength) + fmt("@%.3f", got.hue));
  }

  {
    // Already-neutral reference: every scalar stays near neutral.
    const std::vector<RasterImage> refs{anchor};
    const FitResult r = fit_style_with_anchors(refs, anchors);
    double worst = 0.0;
    for (ConceptId id : kScalars) worst = std::max(worst, std::fabs(std::get<Scalar>(r.preset.params.get(id)).xi));
    c.check(worst <= 0.03, fmt("neutral reference, worst scalar %.3f", worst));
    c.note(fmt("neutral reference -> worst scalar %.3f", worst));
  }

  {
    // Default path: the anchor comes from neutralizing the reference itself.
    ConceptParams truth;
    truth.exposure = 0.3;
    const std::vector<RasterImage> refs{perturb(anchor, truth)};
    const FitResult r = fit_style(refs);
    double passive = 0.0;
    for (ConceptId id : kScalars) {
      if (id != ConceptId::Exposure) passive = std::max(passive, std::fabs(std::get<Scalar>(r.preset.params.get(id)).xi));
    }
    const bool ok = std::fabs(r.preset.params.exposure - 0.3) <= 0.05 && passive <= 0.05;
    c.check(ok, fmt("neutralized-anchor exposure 0.3 -> %.3f", r.preset.params.exposure) + fmt(", passive %.3f", passive));
    c.note(std::string(ok ? "ok   " : "miss ") + fmt("neutralized-anchor exposure 0.3 -> %+.3f", r.preset.params.exposure) +
           fmt(", worst passive %.3f", passive));
  }

  const double elapsed = seconds_since(t0);
  c.check(elapsed < 900.0, "runtime " + fmt("%.0f s", elapsed) + " under 15 min");
  c.note(fmt("runtime %.0f s", elapsed));
}

void conflict_cancellation(Checker& c) {
  const RasterImage anchor = testing::textured_anchor(0);
  const std::vector<RasterImage> anchors{anchor, anchor};
  {
    ConceptParams plus, minus;
    plus.exposure = 0.3;
    minus.exposure = -0.3;
    const std::vector<RasterImage> refs{perturb(anchor, plus), perturb(anchor, minus)};
    const FitResult r = fit_style_with_anchors(refs, anchors);
    const double e = r.preset.params.exposure;
    c.check(std::fabs(e) <= 0.05, fmt("exposure pair recovered %+.3f", e));
    c.note(fmt("exposure +-0.3 pair -> exposure %+.3f", e));
    // Where the summed loss itself is smallest along exposure.
    double best = INFINITY, arg = 0.0;
    const LossTargets ta = make_loss_targets(refs[0]);
    const LossTargets tb = make_loss_targets(refs[1]);
    for (int k = -50; k <= 50; ++k) {
      ConceptParams p;
      p.exposure = k / 100.0;
      const RasterImage rendered = perturb(anchor, p);
      const double v = weighted_loss_terms(ta, rendered, ConceptMask::all(), {}, 0.1).total +
                       weighted_loss_terms(tb, rendered, ConceptMask::all(), {}, 0.1).total;
      if (v < best) {
        best = v;
        arg = p.exposure;
      }
    }
    c.note(fmt("  summed loss along exposure is smallest at %+.2f", arg));
  }
  {
    ConceptParams a, b;
    a.tint = {0.6, 0.6};
    b.tint = {0.6, 0.1};
    const std::vector<RasterImage> refs{perturb(anchor, a), perturb(anchor, b)};
    const FitResult r = fit_style_with_anchors(refs, anchors);
    const StrengthHue t = r.preset.params.tint;
    c.check(t.strength <= 0.15, fmt("antipodal tint pair recovered strength %.3f", t.strength));
    c.note(fmt("antipodal tint pair -> strength %.3f", t.strength) + fmt(" at hue %.3f", t.hue));
    // Grid scan of the summed loss over (strength, hue) with other concepts neutral.
    const LossTargets ta = make_loss_targets(refs[0]);
    const LossTargets tb = make_loss_targets(refs[1]);
    double best = INFINITY, best_s = 0, best_h = 0;
    for (int si = 0; si <= 10; ++si) {
      for (int hi = 0; hi < 20; ++hi) {
        ConceptParams p;
        p.tint = {si / 10.0, hi / 20.0};
        const RasterImage rendered = perturb(anchor, p);
        const double v = weighted_loss_terms(ta, rendered, ConceptMask::all(), {}, 0.1).total +
                         weighted_loss_terms(tb, rendered, ConceptMask::all(), {}, 0.1).total;
        if (v < best) {
          best = v;
          best_s = p.tint.strength;
          best_h = p.tint.hue;
        }
      }
    }
    c.note(fmt("  summed-loss grid minimum at strength %.2f", best_s) + fmt(" hue %.2f", best_h));
  }
}

void metric_oracles(Checker& c) {
  RasterImage a = testing::random_image(21, 64, 48);
  for (double& v : a.samples()) v = 0.05 + 0.8 * v;
  c.near(psnr(a, shifted(a, 0.1)), 20.0, 1e-6, "psnr at uniform 0.1 offset");
  const RasterImage t = testing::textured_scene(3, 80, 60);
  c.check(ssim(t, t) == 1.0, "ssim identical");
  Histogram p10, p20;
  p10.bins[10] = 1;
  p20.bins[20] = 1;
  c.near(emd(p10, p20), 10.0 / 256.0, 1e-9, "emd delta shift");
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + trial % 8;
    std::vector<double> p(n), q(n);
    double sp = 0, sq = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sp += p[i] = u(rng) < 0.25 ? 0.0 : u(rng);
      sq += q[i] = u(rng) < 0.25 ? 0.0 : u(rng);
    }
    if (sp == 0) sp = p[0] = 1;
    if (sq == 0) sq = q[n - 1] = 1;
    Histogram hp, hq;
    for (std::size_t i = 0; i < n; ++i) {
      hp.bins[i] = p[i] /= sp;
      hq.bins[i] = q[i] /= sq;
    }
    worst = std::max(worst, std::fabs(emd(hp, hq) - testing::transport_cost(p, q, 1.0 / 256.0)));
  }
  c.check(worst <= 1e-9, "emd vs brute-force transport on 500 histograms, worst " + fmt("%.2g", worst));
}

void transfer_improves(Checker& c) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int improved = 0;
  for (std::uint32_t k = 0; k < 10; ++k) {
    const RasterImage content = testing::textured_scene(100 + k, 256, 192);
    ConceptParams style;
    style.exposure = 0.35 * u(rng);
    style.contrast = 0.35 * u(rng);
    style.saturation = 0.4 * u(rng);
    style.tint = {0.15 + 0.25 * unit(rng), unit(rng)};
    const RasterImage reference = perturb(testing::textured_anchor(k, 256, 192), style);
    const std::vector<RasterImage> refs{reference};
    const FitResult r = fit_style(refs);
    const double before = emd_image(content, reference);
    const double after = emd_image(apply_style(content, r.preset, ApplyMode::Absolute), reference);
    improved += after < before;
    c.note(fmt("pair %.0f: ", k) + fmt("emd %.4f", before) + fmt(" -> %.4f", after));
  }
  c.check(improved >= 9, "improved in " + std::to_string(improved) + "/10 pairs");
}

void cli_determinism(Checker& c) {
  if (pif_binary.empty()) {
    c.check(false, "pif binary not given (--pif)");
    return;
  }
  testing::ScratchDir tmp("pif-acc");
  fs::create_directories(tmp.path / "refs");
  ConceptParams p;
  p.exposure = 0.2;
  p.tint = {0.3, 0.6};
  save_image(perturb(testing::textured_anchor(0, 256, 192), p), tmp.path / "refs" / "a.png", 8);
  p.contrast = -0.25;
  save_image(perturb(testing::textured_anchor(1, 256, 192), p), tmp.path / "refs" / "b.png", 16);
  auto fit = [&](const char* out) {
    return run_process({pif_binary, "fit", "--refs", (tmp.path / "refs").string(), "--out",
                        (tmp.path / out).string(), "--seed", "7", "--iters", "200"});
  };
  c.check(fit("one.json") == 0, "first fit exits 0");
  c.check(fit("two.json") == 0, "second fit exits 0");
  const std::string a = slurp(tmp.path / "one.json");
  const std::string b = slurp(tmp.path / "two.json");
  c.check(!a.empty() && a == b, "style.json byte-identical across runs");
  c.note(std::to_string(a.size()) + " bytes");
}

// Spawns `pif serve` on an ephemeral port and returns (pid, port).
std::pair<pid_t, int> spawn_server(const fs::path& data_dir) {
  int fds[2];
  if (pipe(fds) != 0) return {-1, -1};
  const pid_t pid = fork();
  if (pid == 0) {
    dup2(fds[1], 1);
    ::close(fds[0]);
    ::close(fds[1]);
    execl(pif_binary.c_str(), pif_binary.c_str(), "serve", "--port", "0", "--data-dir", data_dir.c_str(),
          "--workers", "1", static_cast<char*>(nullptr));
    _exit(127);
  }
  ::close(fds[1]);
  std::string line;
  char ch;
  while (::read(fds[0], &ch, 1) == 1 && ch != '\n') line += ch;
  ::close(fds[0]);
  const auto colon = line.rfind(':', line.find(" ("));
  int port = -1;
  if (line.rfind("listening on ", 0) == 0 && colon != std::string::npos) port = std::atoi(line.c_str() + colon + 1);
  return {pid, port};
}

void stop_server(pid_t pid) {
  if (pid <= 0) return;
  ::kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
}

void service_contract(Checker& c) {
  if (pif_binary.empty()) {
    c.check(false, "pif binary not given (--pif)");
    return;
  }
  testing::ScratchDir tmp("pif-acc-svc");
  auto [pid, port] = spawn_server(tmp.path);
  c.check(port > 0, "server reports its port");
  if (port <= 0) {
    stop_server(pid);
    return;
  }
  httplib::Client cl("127.0.0.1", port);
  cl.set_read_timeout(300, 0);
  auto health = cl.Get("/healthz");
  c.check(health && health->status == 200, "healthz");

  ConceptParams truth;
  truth.exposure = 0.3;
  truth.tint = {0.35, 0.62};
  const RasterImage ref_img = decode_body(testing::png_bytes(perturb(testing::textured_anchor(0, 160, 120), truth), 8));
  const std::string ref_png = testing::png_bytes(ref_img, 8);
  auto up = testing::upload_reference(cl, ref_png);
  c.check(up && up->status == 201, "upload returns 201");
  if (!up || up->status != 201) {
    stop_server(pid);
    return;
  }
  const std::string ref_id = json::parse(up->body)["reference_id"];

  auto submit = cl.Post("/api/fit", json{{"reference_ids", {ref_id}}, {"save_as", "house"}}.dump(), "application/json");
  c.check(submit && submit->status == 202, "fit accepted with 202");
  std::optional<json> job;
  if (submit && submit->status == 202) job = testing::wait_for_job(cl, json::parse(submit->body)["job_id"], 300.0);
  c.check(job && (*job)["state"] == "done", "fit job completes");
  if (!job || (*job)["state"] != "done") {
    stop_server(pid);
    return;
  }
  const StylePreset fitted = decode_preset((*job)["result"].dump());
  const RasterImage anchor = neutralize(ref_img);
  const double before = weighted_loss(ref_img, anchor, ConceptMask::all());
  const double after = weighted_loss(ref_img, perturb(anchor, fitted.params), ConceptMask::all());
  c.check(after < before, fmt("fitted preset lowers loss on the anchor: %.4f", before) + fmt(" -> %.4f", after));
  c.note(fmt("weighted loss on anchor %.4f", before) + fmt(" -> %.4f", after));

  const FitResult local = fit_style(std::vector<RasterImage>{ref_img});
  c.check(local.preset.params == fitted.params, "service fit equals library fit");

  auto stored = cl.Get("/api/presets/house");
  c.check(stored && stored->status == 200 && decode_preset(stored->body) == fitted, "preset saved under save_as");

  const RasterImage content = testing::textured_scene(12, 120, 90);
  const std::string content_png = testing::png_bytes(content, 8);
  const RasterImage decoded_content = decode_body(content_png);
  auto rendered = testing::post_render(cl, content_png, json{{"preset_name", "house"}, {"mode", "absolute"}});
  c.check(rendered && rendered->status == 200 &&
              decode_body(rendered->body) ==
                  decode_body(testing::png_bytes(apply_style(decoded_content, fitted, ApplyMode::Absolute), 8)),
          "render by preset name equals library apply_style");

  auto ident = testing::post_render(cl, content_png,
                                    json{{"params", json::parse(encode_params(neutral_params()))}, {"mode", "relative"}});
  c.check(ident && ident->status == 200 && decode_body(ident->body) == decoded_content,
          "neutral inline params in relative mode are pixel-identical");
  auto off = testing::post_render(cl, content_png, json{{"preset_name", "house"}, {"mode", "relative"}, {"concepts", json::array()}});
  c.check(off && off->status == 200 && decode_body(off->body) == decoded_content, "all concepts off is pixel-identical");

  // Enabling concepts one by one matches the masked library render at each step.
  bool incremental = true;
  ConceptMask mask;
  json names = json::array();
  for (ConceptId id : kAllConcepts) {
    mask.insert(id);
    names.push_back(std::string(concept_name(id)));
    auto step = testing::post_render(cl, content_png, json{{"preset_name", "house"}, {"mode", "relative"}, {"concepts", names}});
    const RasterImage expect = apply_style(decoded_content, fitted, ApplyMode::Relative, mask);
    incremental = incremental && step && step->status == 200 &&
                  decode_body(step->body) == decode_body(testing::png_bytes(expect, 8));
  }
  c.check(incremental, "incremental concept masks match library renders");

  const std::string gray = testing::png_bytes(RasterImage(64, 64, Rgb{0.4, 0.4, 0.4}), 16);
  auto bright = testing::post_render(cl, gray, json{{"mode", "relative"}, {"overrides", {{"exposure", 0.5}}}});
  c.check(bright && bright->status == 200 && std::fabs(luminance(decode_body(bright->body)).mean() - 0.6) <= 1e-4,
          "exposure +0.5 on mid gray scales brightness by 1.5");

  auto unknown = cl.Get("/api/fit/fit-424242");
  c.check(unknown && unknown->status == 404, "unknown job is 404");

  stop_server(pid);
  // Restart over the same data directory: presets and references persist.
  auto [pid2, port2] = spawn_server(tmp.path);
  if (port2 > 0) {
    httplib::Client again("127.0.0.1", port2);
    auto p = again.Get("/api/presets/house");
    auto s = again.Get("/api/stats/" + ref_id);
    c.check(p && p->status == 200 && s && s->status == 200, "state persists across restart");
  } else {
    c.check(false, "server restarts");
  }
  stop_server(pid2);
  c.note("served with no UI assets present");
}

struct Criterion {
  const char* name;
  const char* title;
  void (*run)(Checker&);
};

const Criterion kCriteria[] = {
    {"formula", "Formula oracle suite", formula_oracles},
    {"identity", "Identity & composition", identity_composition},
    {"weights", "Weight-map contract", weight_maps},
    {"recovery", "Synthetic style recovery", style_recovery},
    {"cancellation", "Conflict cancellation", conflict_cancellation},
    {"metrics", "Metric oracles", metric_oracles},
    {"transfer", "Transfer improves style distance", transfer_improves},
    {"determinism", "Determinism of CLI fit", cli_determinism},
    {"service", "Service contract", service_contract},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> only;
  bool strict = false;
  std::string report_path;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--pif" && i + 1 < argc) {
      pif_binary = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string item; std::getline(ss, item, ',');) only.push_back(item);
    } else if (a == "--strict") {
      strict = true;
    } else if (a == "--report" && i + 1 < argc) {
      report_path = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--pif PATH] [--only NAME,...] [--strict] [--report FILE]\n",
                   argv[0]);
      return 2;
    }
  }
  if (!pif_binary.empty()) pif_binary = fs::absolute(pif_binary).string();
  std::string report;
  // Verdicts go to stdout and, with --report, to a file as well.
  auto emit = [&](const std::string& line) {
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    report += line + "\n";
  };

  int passed = 0, run = 0;
  for (const Criterion& cr : kCriteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), cr.name) == only.end()) continue;
    Checker checker;
    const auto t0 = Clock::now();
    try {
      cr.run(checker);
    } catch (const std::exception& e) {
      checker.check(false, std::string("exception: ") + e.what());
    }
    const bool ok = checker.failures().empty();
    ++run;
    passed += ok;
    emit(std::string(ok ? "PASS " : "FAIL ") + cr.title + " [" + cr.name + "]" +
         " (" + std::to_string(checker.total()) + " checks," + fmt(" %.1f s)", seconds_since(t0)));
    for (const auto& f : checker.failures()) emit("       failed: " + f);
    for (const auto& n : checker.notes()) emit("       " + n);
  }
  emit(std::to_string(passed) + "/" + std::to_string(run) + " criteria passed");
  if (!report_path.empty()) {
    std::ofstream(report_path) << report;
  }
  return strict && passed != run ? 1 : 0;
}
