#include "oracle.hpp"

#include <cmath>

namespace oracle {
namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

void lstm_step(const emofuse::LstmParams& p, const Vec& x, Vec& h, Vec& c) {
  const std::size_t H = p.hidden;
  const std::size_t I = p.input;
  auto pre = [&](std::size_t gate, std::size_t j) {
    const std::size_t r = gate * H + j;
    double s = p.b.value[r];
    for (std::size_t k = 0; k < I; ++k) s += p.Wx.value(r, k) * x[k];
    for (std::size_t k = 0; k < H; ++k) s += p.Wh.value(r, k) * h[k];
    return s;
  };
  Vec h_new(H), c_new(H);
  for (std::size_t j = 0; j < H; ++j) {
    const double i = sigmoid(pre(0, j));
    const double f = sigmoid(pre(1, j));
    const double g = std::tanh(pre(2, j));
    const double o = sigmoid(pre(3, j));
    c_new[j] = f * c[j] + i * g;
    h_new[j] = o * std::tanh(c_new[j]);
  }
  h = h_new;
  c = c_new;
}

Vec semantic_forward(const emofuse::SemanticNetParams& p, const std::vector<Vec>& objects, std::size_t steps) {
  const std::size_t H = p.dims.H;
  const std::size_t F = p.dims.F;
  const std::size_t M = p.dims.M;
  const std::size_t N = objects.size();
  if (N == 0) return Vec(H, 0.0);

  Vec f_mean(F, 0.0);
  for (const Vec& f : objects) {
    for (std::size_t k = 0; k < F; ++k) f_mean[k] += f[k];
  }
  for (double& v : f_mean) v /= static_cast<double>(N);

  Vec h_att(H, 0.0), c_att(H, 0.0), h_cor(H, 0.0), c_cor(H, 0.0);
  const auto& a = p.attention;
  for (std::size_t t = 0; t < steps; ++t) {
    Vec x_att;
    x_att.insert(x_att.end(), h_cor.begin(), h_cor.end());
    x_att.insert(x_att.end(), f_mean.begin(), f_mean.end());
    const Vec h_att_prev = h_att;
    lstm_step(p.att_lstm, x_att, h_att, c_att);

    Vec score(N);
    for (std::size_t i = 0; i < N; ++i) {
      double s = 0.0;
      for (std::size_t m = 0; m < M; ++m) {
        double z = 0.0;
        for (std::size_t k = 0; k < F; ++k) z += a.Wf.value(m, k) * objects[i][k];
        for (std::size_t k = 0; k < H; ++k) z += a.Wh.value(m, k) * h_att[k];
        s += a.omega.value[m] * std::tanh(z);
      }
      score[i] = s;
    }
    double top = score[0];
    for (double s : score) top = std::max(top, s);
    double total = 0.0;
    Vec alpha(N);
    for (std::size_t i = 0; i < N; ++i) total += alpha[i] = std::exp(score[i] - top);
    for (double& v : alpha) v /= total;

    Vec f_att(F, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t k = 0; k < F; ++k) f_att[k] += alpha[i] * objects[i][k];
    }
    Vec x_cor;
    x_cor.insert(x_cor.end(), h_att_prev.begin(), h_att_prev.end());
    x_cor.insert(x_cor.end(), f_att.begin(), f_att.end());
    lstm_step(p.cor_lstm, x_cor, h_cor, c_cor);
  }
  return h_cor;
}

double hierarchical_loss(const emofuse::Taxonomy& t, const Vec& p, std::size_t y, double lambda) {
  const auto pol = t.polarity_of(y);
  double same = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (t.polarity_of(k) == pol) same += p[k];
  }
  return -std::log(std::max(p[y], 1e-12)) - lambda * std::log(std::max(same, 1e-12));
}

Vec central_diff(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    Vec up = x, down = x;
    up[k] += h;
    down[k] -= h;
    g[k] = (f(up) - f(down)) / (2.0 * h);
  }
  return g;
}

}  // namespace oracle
