#include "emofuse/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "emofuse/encoders.hpp"
#include "emofuse/head.hpp"
#include "emofuse/kernels.hpp"
#include "emofuse/model.hpp"
#include "emofuse/ops.hpp"
#include "emofuse/rng.hpp"
#include "emofuse/semantic_net.hpp"

namespace emofuse {

void GradComparison::compare(std::span<const double> analytic, std::span<const double> numeric) {
  require_shape(analytic.size() == numeric.size(), "gradcheck: analytic/numeric length mismatch");
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    ++elements;
    const double diff = std::abs(analytic[k] - numeric[k]);
    const double scale = std::max(std::abs(analytic[k]), std::abs(numeric[k]));
    const double rel = scale > 0.0 ? diff / scale : 0.0;
    max_absolute = std::max(max_absolute, diff);
    if (scale > tol.absolute_floor) max_relative = std::max(max_relative, rel);
    if (diff > tol.absolute_floor && !(rel < tol.relative)) ++failures;
  }
}

void check_vector(GradComparison& cmp, Vec& value, std::span<const double> analytic,
                  const std::function<double()>& loss) {
  const Vec saved = value;
  const Vec numeric = finite_diff_grad(
      [&](std::span<const double> x) {
        std::copy(x.begin(), x.end(), value.begin());
        return loss();
      },
      saved, cmp.tol.step);
  value = saved;
  cmp.compare(analytic, numeric);
}

void check_tensor(GradComparison& cmp, Tensor& value, const Tensor& analytic, const std::function<double()>& loss) {
  const Vec saved(value.data().begin(), value.data().end());
  const Vec numeric = finite_diff_grad(
      [&](std::span<const double> x) {
        std::copy(x.begin(), x.end(), value.data().begin());
        return loss();
      },
      saved, cmp.tol.step);
  std::copy(saved.begin(), saved.end(), value.data().begin());
  cmp.compare(analytic.data(), numeric);
}

namespace {

Vec random_vec(std::size_t n, Rng& rng, double scale = 1.0) {
  Vec v(n);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return v;
}

Tensor random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  return Tensor::matrix(rows, cols, random_vec(rows * cols, rng, scale));
}

// Random linear functional of a vector output: loss = sum_k r_k y_k.
double project(std::span<const double> r, std::span<const double> y) { return kernels::dot(r, y); }

void randomize(Param& p, Rng& rng, double scale = 0.5) {
  for (double& x : p.value.data()) x = rng.uniform(-scale, scale);
  p.zero_grad();
}

GradCheckCase affine_case() {
  return {"affine", [](std::uint64_t seed, GradComparison& cmp) {
            Rng rng(seed);
            Vec x = random_vec(3, rng);
            Tensor W = random_matrix(2, 3, rng);
            Tensor b = Tensor::vector(random_vec(2, rng));
            const Vec r = random_vec(2, rng);
            Vec gx(3, 0.0);
            Tensor gW = Tensor::zeros(2, 3);
            Tensor gb = Tensor::zeros(2);
            affine_backward(x, W, r, gx, &gW, &gb);
            auto loss = [&] { return project(r, affine(x, W, &b)); };
            check_vector(cmp, x, gx, loss);
            check_tensor(cmp, W, gW, loss);
            check_tensor(cmp, b, gb, loss);
          }};
}

GradCheckCase elementwise_case(const char* name, Vec (*fwd)(std::span<const double>),
                               void (*bwd)(std::span<const double>, std::span<const double>, std::span<double>)) {
  return {name, [fwd, bwd](std::uint64_t seed, GradComparison& cmp) {
            Rng rng(seed);
            Vec x = random_vec(5, rng, 2.0);
            const Vec r = random_vec(5, rng);
            const Vec y = fwd(x);
            Vec gx(5, 0.0);
            bwd(y, r, gx);
            check_vector(cmp, x, gx, [&] { return project(r, fwd(x)); });
          }};
}

GradCheckCase softmax_case() {
  return {"softmax", [](std::uint64_t seed, GradComparison& cmp) {
            Rng rng(seed);
            Vec x = random_vec(6, rng, 2.0);
            const Vec r = random_vec(6, rng);
            const Vec p = softmax(x);
            Vec gx(6, 0.0);
            softmax_backward(p, r, gx);
            check_vector(cmp, x, gx, [&] { return project(r, softmax(x)); });
          }};
}

GradCheckCase concat_case() {
  return {"concat", [](std::uint64_t seed, GradComparison& cmp) {
            Rng rng(seed);
            Vec a = random_vec(2, rng);
            Vec b = random_vec(3, rng);
            Vec c = random_vec(1, rng);
            const Vec r = random_vec(6, rng);
            Vec ga(2, 0.0), gb(3, 0.0), gc(1, 0.0);
            concat_backward(r, {ga, gb, gc});
            auto loss = [&] { return project(r, concat({a, b, c})); };
            check_vector(cmp, a, ga, loss);
            check_vector(cmp, b, gb, loss);
            check_vector(cmp, c, gc, loss);
          }};
}

GradCheckCase mean_rows_case() {
  return {"mean_rows", [](std::uint64_t seed, GradComparison& cmp) {
            Rng rng(seed);
            Tensor F = random_matrix(4, 3, rng);
            const Vec r = random_vec(3, rng);
            Tensor gF = Tensor::zeros(4, 3);
            mean_rows_backward(r, gF);
            check_tensor(cmp, F, gF, [&] { return project(r, mean_rows(F)); });
          }};
}

GradCheckCase weighted_sum_case() {
  return {"weighted_sum", [](std::uint64_t seed, GradComparison& cmp) {
            Rng rng(seed);
            Tensor F = random_matrix(4, 3, rng);
            Vec alpha = softmax(random_vec(4, rng));
            const Vec r = random_vec(3, rng);
            Tensor gF = Tensor::zeros(4, 3);
            Vec ga(4, 0.0);
            weighted_sum_backward(F, alpha, r, &gF, ga);
            auto loss = [&] { return project(r, weighted_sum(F, alpha)); };
            check_tensor(cmp, F, gF, loss);
            check_vector(cmp, alpha, ga, loss);
          }};
}

GradCheckCase nll_case() {
  return {"nll_from_probs", [](std::uint64_t seed, GradComparison& cmp) {
            Rng rng(seed);
            Vec p = softmax(random_vec(5, rng));
            const std::size_t target = rng.below(5);
            Vec gp(5, 0.0);
            nll_backward(p, target, 1.0, gp);
            check_vector(cmp, p, gp, [&] { return nll_from_probs(p, target); });
          }};
}

GradCheckCase lstm_case(const GradCheckSizes& s) {
  return {"lstm_step", [s](std::uint64_t seed, GradComparison& cmp) {
            Rng rng(seed);
            LstmParams p("lstm", s.F, s.H);
            for (Param* q : p.params()) randomize(*q, rng);
            Vec x = random_vec(s.F, rng);
            LstmState st{random_vec(s.H, rng), random_vec(s.H, rng)};
            const Vec rh = random_vec(s.H, rng);
            const Vec rc = random_vec(s.H, rng);
            LstmCache cache;
            lstm_step(p, x, st, &cache);
            Vec gx(s.F, 0.0), gh(s.H, 0.0), gc(s.H, 0.0);
            lstm_step_backward(p, cache, rh, rc, gx, gh, gc);
            auto loss = [&] {
              const LstmState out = lstm_step(p, x, st);
              return project(rh, out.h) + project(rc, out.c);
            };
            check_vector(cmp, x, gx, loss);
            check_vector(cmp, st.h, gh, loss);
            check_vector(cmp, st.c, gc, loss);
            for (Param* q : p.params()) check_tensor(cmp, q->value, q->grad, loss);
          }};
}

SampleRecord random_sample(const GradCheckSizes& s, std::size_t classes, bool face, Rng& rng) {
  SampleRecord r;
  r.id = "gradcheck";
  r.label_index = rng.below(classes);
  r.global = random_vec(s.raw_global, rng);
  r.objects = random_matrix(s.objects, s.F, rng);
  if (face) r.face.raw = random_vec(s.raw_face, rng);
  return r;
}

GradCheckCase attention_case(const GradCheckSizes& s) {
  return {"attention", [s](std::uint64_t seed, GradComparison& cmp) {
            Rng rng(seed);
            AttentionParams a(s.M, s.F, s.H);
            for (Param* q : a.params()) randomize(*q, rng, 1.0);
            Tensor F = random_matrix(s.objects + 1, s.F, rng);
            Vec h = random_vec(s.H, rng);
            const Vec r = random_vec(F.rows(), rng);
            auto loss = [&] { return project(r, attention_weights(a, F, h)); };
            const std::size_t N = F.rows();
            Vec wh(a.M);
            kernels::matvec(a.Wh.value.data(), a.M, a.H, h, wh);
            Tensor act = Tensor::zeros(N, a.M);
            Vec scores(N);
            for (std::size_t i = 0; i < N; ++i) {
              Vec pre(a.M);
              kernels::matvec(a.Wf.value.data(), a.M, a.F, F.row(i), pre);
              for (std::size_t m = 0; m < a.M; ++m) act(i, m) = std::tanh(pre[m] + wh[m]);
              scores[i] = kernels::dot(a.omega.value.data(), act.row(i));
            }
            const Vec alpha = softmax(scores);
            Vec gs(N, 0.0);
            softmax_backward(alpha, r, gs);
            Tensor gF = Tensor::zeros(N, a.F);
            Vec gh(a.H, 0.0);
            for (std::size_t i = 0; i < N; ++i) {
              kernels::axpy(gs[i], act.row(i), a.omega.grad.data());
              Vec gpre(a.M);
              for (std::size_t m = 0; m < a.M; ++m) gpre[m] = gs[i] * a.omega.value[m] * (1.0 - act(i, m) * act(i, m));
              affine_backward(F.row(i), a.Wf.value, gpre, gF.row(i), &a.Wf.grad, nullptr);
              affine_backward(h, a.Wh.value, gpre, gh, &a.Wh.grad, nullptr);
            }
            check_tensor(cmp, F, gF, loss);
            check_vector(cmp, h, gh, loss);
            for (Param* q : a.params()) check_tensor(cmp, q->value, q->grad, loss);
          }};
}

GradCheckCase semantic_case(const GradCheckSizes& s) {
  return {"semantic_net", [s](std::uint64_t seed, GradComparison& cmp) {
            Rng rng(seed);
            SemanticNetParams p({s.F, s.H, s.M});
            for (Param* q : p.params()) randomize(*q, rng, 0.8);
            Tensor F = random_matrix(s.objects, s.F, rng);
            const Vec r = random_vec(s.H, rng);
            auto [v, trace] = semantic_forward(p, F, s.steps);
            Tensor gF = Tensor::zeros(F.rows(), F.cols());
            semantic_backward(p, trace, r, &gF);
            auto loss = [&] { return project(r, semantic_forward(p, F, s.steps).first); };
            check_tensor(cmp, F, gF, loss);
            for (Param* q : p.params()) check_tensor(cmp, q->value, q->grad, loss);
          }};
}

GradCheckCase fc_semantic_case(const GradCheckSizes& s) {
  return {"fc_semantic", [s](std::uint64_t seed, GradComparison& cmp) {
            Rng rng(seed);
            FcSemanticParams p({s.F, s.H, s.M});
            for (Param* q : p.params()) randomize(*q, rng, 0.8);
            Tensor F = random_matrix(s.objects, s.F, rng);
            const Vec r = random_vec(s.H, rng);
            auto [v, trace] = fc_semantic_forward(p, F);
            Tensor gF = Tensor::zeros(F.rows(), F.cols());
            fc_semantic_backward(p, trace, r, &gF);
            auto loss = [&] { return project(r, fc_semantic_forward(p, F).first); };
            check_tensor(cmp, F, gF, loss);
            for (Param* q : p.params()) check_tensor(cmp, q->value, q->grad, loss);
          }};
}

GradCheckCase encoder_case(const char* name, bool expression, std::size_t raw, std::size_t out) {
  return {name, [=](std::uint64_t seed, GradComparison& cmp) {
            Rng rng(seed);
            EncoderParams p(name, EncoderMode::projection, raw, out);
            for (Param* q : p.params()) randomize(*q, rng, 0.8);
            FaceInput face{random_vec(raw, rng)};
            const Vec r = random_vec(out, rng);
            EncoderTrace trace;
            if (expression) {
              encode_expression(p, face, &trace);
            } else {
              encode_global(p, *face.raw, &trace);
            }
            Vec graw(raw, 0.0);
            encoder_backward(p, trace, r, graw);
            auto loss = [&] {
              return project(r, expression ? encode_expression(p, face) : encode_global(p, *face.raw));
            };
            check_vector(cmp, *face.raw, graw, loss);
            for (Param* q : p.params()) check_tensor(cmp, q->value, q->grad, loss);
          }};
}

GradCheckCase head_case() {
  return {"emotion_head", [](std::uint64_t seed, GradComparison& cmp) {
            Rng rng(seed);
            const Taxonomy tax = seed % 2 == 0 ? mikel_default() : emotion_roi_default();
            ClassifierParams cls(tax.size(), 7);
            randomize(cls.W, rng, 1.0);
            Vec v = random_vec(7, rng);
            const std::size_t y = rng.below(tax.size());
            const double lambda = rng.uniform(0.0, 2.0);
            const Vec p = classify(cls, v);
            Vec gp(p.size(), 0.0);
            hierarchical_loss_backward(tax, p, y, lambda, 1.0, gp);
            Vec glogits(p.size(), 0.0);
            softmax_backward(p, gp, glogits);
            Vec gv(7, 0.0);
            affine_backward(v, cls.W.value, glogits, gv, &cls.W.grad, nullptr);
            auto loss = [&] { return hierarchical_loss(tax, classify(cls, v), y, lambda).total; };
            check_vector(cmp, v, gv, loss);
            check_tensor(cmp, cls.W.value, cls.W.grad, loss);
          }};
}

GradCheckCase composite_case(const GradCheckSizes& s) {
  return {"composite_loss", [s](std::uint64_t seed, GradComparison& cmp) {
            Rng rng(seed);
            ModelSpec spec;
            spec.dims = ModelDims{s.d1, s.H, s.d3, s.H, s.M, s.F};
            spec.raw_global = s.raw_global;
            spec.raw_face = s.raw_face;
            spec.t_steps = s.steps;
            Model model(spec);
            model.init(seed);
            const SampleRecord sample = random_sample(s, spec.taxonomy.size(), seed % 3 != 0, rng);
            const double lambda = rng.uniform(0.25, 2.0);
            model.loss_and_backward(sample, lambda, 1.0);
            auto loss = [&] {
              return hierarchical_loss(model.spec().taxonomy, model.forward(sample), sample.label_index, lambda).total;
            };
            for (Param* q : model.params()) check_tensor(cmp, q->value, q->grad, loss);
          }};
}

}  // namespace

std::vector<GradCheckCase> default_gradcheck_cases(const GradCheckSizes& sizes) {
  return {
      affine_case(),
      elementwise_case("tanh_map", &tanh_map, &tanh_backward),
      elementwise_case("sigmoid_map", &sigmoid_map, &sigmoid_backward),
      softmax_case(),
      concat_case(),
      mean_rows_case(),
      weighted_sum_case(),
      nll_case(),
      lstm_case(sizes),
      attention_case(sizes),
      semantic_case(sizes),
      fc_semantic_case(sizes),
      encoder_case("global_encoder", false, sizes.raw_global, sizes.d1),
      encoder_case("expression_encoder", true, sizes.raw_face, sizes.d3),
      head_case(),
      composite_case(sizes),
  };
}

bool GradCheckReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const GradCheckRow& r) { return r.result.passed(); });
}

std::vector<std::string> GradCheckReport::failing() const {
  std::vector<std::string> out;
  for (const auto& r : rows) {
    if (!r.result.passed()) out.push_back(r.component);
  }
  return out;
}

GradCheckReport run_gradcheck(const std::vector<GradCheckCase>& cases, std::uint64_t base_seed,
                              std::size_t instances, const GradTolerance& tol) {
  GradCheckReport report;
  for (const auto& c : cases) {
    GradCheckRow row;
    row.component = c.component;
    row.instances = instances;
    row.result.tol = tol;
    for (std::size_t k = 0; k < instances; ++k) c.run(base_seed + k, row.result);
    report.rows.push_back(std::move(row));
  }
  return report;
}

void print_gradcheck(const GradCheckReport& report, std::ostream& out) {
  char line[160];
  if (!report.rows.empty()) {
    const GradTolerance& t = report.rows.front().result.tol;
    std::snprintf(line, sizeof line, "central differences, h = %g; element passes if |a - n| <= %g or rel < %g\n", t.step,
                  t.absolute_floor, t.relative);
    out << line;
  }
  std::snprintf(line, sizeof line, "%-20s %9s %9s %14s %14s  %s\n", "component", "instances", "elements",
                "max_rel_err", "max_abs_err", "status");
  out << line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%-20s %9zu %9zu %14.3e %14.3e  %s\n", r.component.c_str(), r.instances,
                  r.result.elements, r.result.max_relative, r.result.max_absolute,
                  r.result.passed() ? "PASS" : "FAIL");
    out << line;
  }
}

}  // namespace emofuse
