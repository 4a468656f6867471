#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "emofuse/cli.hpp"
#include "emofuse/gradcheck.hpp"
#include "emofuse/head.hpp"
#include "emofuse/model.hpp"
#include "emofuse/ops.hpp"
#include "emofuse/rng.hpp"
#include "emofuse/semantic_net.hpp"
#include "json.hpp"
#include "support/oracle.hpp"

using namespace emofuse;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

Vec random_probs(std::size_t n, Rng& rng) {
  Vec z(n);
  for (double& v : z) v = rng.normal() * 4.0;
  return softmax(z);
}

Outcome loss_demo() {
  const auto t0 = Clock::now();
  const auto rows = run_loss_demo(1.0);
  std::ostringstream out, err;
  const int rc = run_cli({"loss-demo"}, out, err);
  const double secs = seconds_since(t0);
  const auto& f = rows[1].loss;
  const auto& e = rows[2].loss;
  const auto& h = rows[3].loss;
  bool ok = rc == 0 && secs < 1.0;
  ok = ok && std::abs(f.emotion - 2.30) <= 0.01 && std::abs(e.emotion - 2.30) <= 0.01 &&
       std::abs(h.emotion - 2.30) <= 0.01;
  ok = ok && std::abs(e.polarity - 0.11) <= 0.005 && std::abs(h.polarity - 1.61) <= 0.005;
  for (const auto& r : rows) ok = ok && r.loss.total == r.loss.emotion + 1.0 * r.loss.polarity;
  return {ok, fmt("L_emo %.4f/%.4f, L_pol easy %.4f hard %.4f, %.3f s", e.emotion, h.emotion, e.polarity,
                  h.polarity, secs)};
}

Outcome lambda_zero() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  std::size_t mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const Taxonomy t = i % 2 ? mikel_default() : emotion_roi_default();
    const Vec p = random_probs(t.size(), rng);
    const std::size_t y = rng.below(t.size());
    const double ce = nll_from_probs(p, y);
    if (!same_bits(hierarchical_loss(t, p, y, 0.0).total, ce)) ++mismatches;
    Vec g1(p.size(), 0.0), g2(p.size(), 0.0);
    hierarchical_loss_backward(t, p, y, 0.0, 1.0, g1);
    nll_backward(p, y, 1.0, g2);
    if (std::memcmp(g1.data(), g2.data(), g1.size() * sizeof(double)) != 0) ++mismatches;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 5.0, fmt("%zu mismatches in 1000 instances, %.3f s", mismatches, secs)};
}

Outcome polarity_sums() {
  const auto t0 = Clock::now();
  Rng rng(77);
  double worst = 0.0;
  for (std::size_t C : {2u, 6u, 8u}) {
    std::vector<std::string> names;
    std::vector<Polarity> pol;
    for (std::size_t k = 0; k < C; ++k) {
      names.push_back("c" + std::to_string(k));
      pol.push_back(k < C / 2 ? Polarity::positive : Polarity::negative);
    }
    const Taxonomy t(names, pol);
    for (int i = 0; i < 10000; ++i) {
      const auto pp = polarity_aggregate(t, random_probs(C, rng));
      worst = std::max(worst, std::abs(pp[0] + pp[1] - 1.0));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 5.0, fmt("max |sum - 1| = %.2e over 3 x 10^4 outputs, %.3f s", worst, secs)};
}

Outcome grad_check() {
  const auto t0 = Clock::now();
  std::ostringstream out, err;
  const int rc = run_gradcheck_command(default_gradcheck_cases(), 1, out, err);
  const double secs = seconds_since(t0);
  const std::string table = out.str();
  bool covered = true;
  for (const char* c : {"affine", "softmax", "lstm_step", "attention", "semantic_net", "global_encoder",
                        "expression_encoder", "emotion_head", "composite_loss"}) {
    covered = covered && table.find(c) != std::string::npos;
  }
  return {rc == 0 && covered && secs < 60.0,
          fmt("%s, 10 seeds per component, %.2f s", rc == 0 ? "all components pass" : err.str().c_str(), secs)};
}

Outcome semantic_oracle() {
  const SemanticDims d{3, 4, 3};
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SemanticNetParams p(d);
    Rng rng(seed + 1000);
    for (Param* q : p.params()) {
      for (double& v : q->value.data()) v = rng.uniform(-1.0, 1.0);
    }
    Tensor F = Tensor::zeros(2, 3);
    std::vector<Vec> rows(2, Vec(3));
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t k = 0; k < 3; ++k) rows[i][k] = F(i, k) = rng.normal();
    }
    const Vec v = semantic_forward(p, F, 2).first;
    const Vec ref = oracle::semantic_forward(p, rows, 2);
    for (std::size_t j = 0; j < v.size(); ++j) worst = std::max(worst, std::abs(v[j] - ref[j]));
  }
  return {worst <= 1e-10, fmt("max |net - oracle| = %.2e (N=2, T=2, F=3, H=4, M=3, 10 seeds)", worst)};
}

Outcome absent_stimuli() {
  ModelSpec spec;
  spec.dims = ModelDims{3, 4, 3, 4, 3, 3};
  spec.raw_global = 5;
  spec.raw_face = 4;
  Model m(spec);
  m.init(5);
  SampleRecord s;
  s.label_index = 3;
  s.global = {0.1, -0.2, 0.3, 0.4, -0.5};
  s.objects = Tensor::zeros(0, 0);

  ForwardCache cache;
  m.forward(s, &cache);
  const FusionDims fd = m.fusion_dims();
  bool zeros = true;
  for (std::size_t k = fd.global; k < fd.total(); ++k) {
    const double v = cache.v_emo[k];
    zeros = zeros && v == 0.0 && !std::signbit(v);
  }
  m.zero_grad();
  m.loss_and_backward(s, 1.0, 1.0);
  bool no_grad = true;
  for (Param* q : m.expression_encoder.params()) {
    for (double g : q->grad.data()) no_grad = no_grad && g == 0.0;
  }
  for (Param* q : m.semantic_net.params()) {
    for (double g : q->grad.data()) no_grad = no_grad && g == 0.0;
  }
  return {zeros && no_grad, fmt("v_s and v_e bitwise +0.0: %s; encoder grads zero: %s", zeros ? "yes" : "no",
                                no_grad ? "yes" : "no")};
}

struct TrainRun {
  int rc = -1;
  double seconds = 0.0;
  std::string report, model;
};

TrainRun train_synth(const fs::path& dir, const std::string& tag) {
  const auto t0 = Clock::now();
  std::ostringstream out, err;
  TrainRun r;
  r.rc = run_cli({"train", "--synth", "--seed", "42", "--model", (dir / (tag + ".bin")).string(), "--out",
                  (dir / (tag + ".json")).string()},
                 out, err);
  r.seconds = seconds_since(t0);
  if (r.rc != 0) std::cerr << err.str();
  r.report = slurp(dir / (tag + ".json"));
  r.model = slurp(dir / (tag + ".bin"));
  return r;
}

Outcome synthetic_accuracy(const TrainRun& run) {
  if (run.rc != 0) return {false, fmt("train exited with %d", run.rc)};
  const auto j = nlohmann::json::parse(run.report);
  const double emo = j["final"]["test"]["emotion_accuracy"];
  const double pol = j["final"]["test"]["polarity_accuracy"];
  const std::size_t epochs = j["epochs"].size();
  const std::size_t n = j["final"]["test"]["total"];
  return {emo >= 0.90 && pol >= emo && epochs <= 50 && run.seconds < 300.0,
          fmt("held-out emotion %.4f, polarity %.4f (%zu samples), %zu epochs, %.1f s", emo, pol, n, epochs,
              run.seconds)};
}

Outcome determinism(const TrainRun& a, const TrainRun& b) {
  const bool model_eq = !a.model.empty() && a.model == b.model;
  const bool report_eq = !a.report.empty() && a.report == b.report;
  return {a.rc == 0 && b.rc == 0 && model_eq && report_eq,
          fmt("model files %s (%zu bytes), reports %s", model_eq ? "identical" : "DIFFER", a.model.size(),
              report_eq ? "identical" : "DIFFER")};
}

bool csv_well_formed(const std::string& csv, const std::string& first_col, std::size_t rows_expected,
                     std::string& why) {
  std::istringstream in(csv);
  std::string header, line;
  std::getline(in, header);
  if (header.rfind(first_col + ",emotion_acc,polarity_acc,", 0) != 0) {
    why = "bad header";
    return false;
  }
  const auto cols = std::count(header.begin(), header.end(), ',');
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (std::count(line.begin(), line.end(), ',') != cols) {
      why = "ragged row";
      return false;
    }
    ++rows;
  }
  if (rows != rows_expected) {
    why = fmt("%zu rows", rows);
    return false;
  }
  return true;
}

Outcome sweeps(const fs::path& dir, const TrainRun& reference) {
  const auto t0 = Clock::now();
  struct Sweep {
    const char* param;
    const char* values;
    const char* match;
  };
  bool ok = true;
  std::string detail;
  const auto ref = nlohmann::json::parse(reference.report)["final"]["test"];
  for (const Sweep s : {Sweep{"lambda", "0,0.5,1,1.5,2", "1"}, Sweep{"N", "1,5,10,15,20", "10"}}) {
    const auto t1 = Clock::now();
    const fs::path out_path = dir / (std::string(s.param) + ".csv");
    std::ostringstream out, err;
    const int rc = run_cli({"sweep", "--synth", "--seed", "42", "--param", s.param, "--values", s.values, "--out",
                            out_path.string()},
                           out, err);
    const std::string csv = slurp(out_path);
    std::string why;
    const bool formed = rc == 0 && csv_well_formed(csv, s.param, 5, why);
    bool reproduces = false;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind(std::string(s.match) + ",", 0) != 0) continue;
      double v = 0, emo = 0, pol = 0;
      std::sscanf(line.c_str(), "%lf,%lf,%lf", &v, &emo, &pol);
      reproduces = emo == ref["emotion_accuracy"].get<double>() && pol == ref["polarity_accuracy"].get<double>();
    }
    ok = ok && formed && reproduces;
    detail += fmt("%s: %s, %s=%s row %s train run, %.1f s; ", s.param, formed ? "5 rows" : why.c_str(), s.param,
                  s.match, reproduces ? "reproduces" : "DIFFERS FROM", seconds_since(t1));
    std::cout << "    " << s.param << " sweep:\n";
    std::istringstream show(csv);
    while (std::getline(show, line)) std::cout << "      " << line << "\n";
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 1800.0;
  return {ok, detail + fmt("total %.1f s", secs)};
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "emofuse_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  int failures = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << o.detail << std::endl;
  };

  report(1, "loss demo", loss_demo());
  report(2, "lambda = 0 is plain cross-entropy", lambda_zero());
  report(3, "polarity probabilities sum to 1", polarity_sums());
  report(4, "gradient check", grad_check());
  report(5, "semantic net vs straight-line oracle", semantic_oracle());
  report(6, "absent face / no objects", absent_stimuli());
  const TrainRun first = train_synth(dir, "run_a");
  report(7, "synthetic held-out accuracy", synthetic_accuracy(first));
  report(8, "lambda and N sweeps", sweeps(dir, first));
  const TrainRun second = train_synth(dir, "run_b");
  report(9, "bitwise reproducible training", determinism(first, second));

  fs::remove_all(dir);
  std::cout << (failures == 0 ? "all 9 criteria pass" : fmt("%d criteria failed", failures)) << std::endl;
  return failures == 0 ? 0 : 1;
}
