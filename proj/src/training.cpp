#include "emofuse/training.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "emofuse/error.hpp"

namespace emofuse {

double Schedule::lr_at_epoch(std::size_t epoch) const {
  if (epoch >= total_epochs) throw std::out_of_range("lr_at_epoch: epoch out of range");
  return base_lr * std::pow(decay_factor, static_cast<double>(epoch / decay_every));
}

Adam::Adam(std::vector<Param*> params) : params_(std::move(params)) {
  for (const Param* p : params_) {
    Tensor zero = p->value;
    zero.fill(0.0);
    m_.push_back(zero);
    v_.push_back(std::move(zero));
  }
}

void Adam::step(double lr, double weight_decay, bool decoupled) {
  ++t_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Param& p = *params_[k];
    auto value = p.value.data();
    auto grad = p.grad.data();
    auto m = m_[k].data();
    auto v = v_[k].data();
    for (std::size_t j = 0; j < value.size(); ++j) {
      double g = grad[j];
      if (!decoupled) g += weight_decay * value[j];
      m[j] = kBeta1 * m[j] + (1.0 - kBeta1) * g;
      v[j] = kBeta2 * v[j] + (1.0 - kBeta2) * g * g;
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      if (decoupled) value[j] -= lr * weight_decay * value[j];
      value[j] -= lr * m_hat / (std::sqrt(v_hat) + kEps);
    }
    p.zero_grad();
  }
}

EpochSummary train_epoch(Model& model, Adam& adam, const Dataset& data, const TrainConfig& config, std::size_t epoch,
                         double lr, Rng& shuffle_rng) {
  if (data.empty()) throw DataError("train_epoch: empty dataset");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

  EpochSummary summary;
  summary.epoch = epoch;
  summary.lr = lr;
  for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
    const std::size_t end = std::min(order.size(), start + config.batch_size);
    const double scale = 1.0 / static_cast<double>(end - start);
    for (std::size_t k = start; k < end; ++k) {
      const LossBreakdown loss = model.loss_and_backward(data[order[k]], config.lambda, scale);
      summary.loss_emo += loss.emotion;
      summary.loss_pol += loss.polarity;
      summary.loss_total += loss.total;
    }
    adam.step(lr, config.weight_decay, config.decoupled_weight_decay);
  }
  const double n = static_cast<double>(data.size());
  summary.loss_emo /= n;
  summary.loss_pol /= n;
  summary.loss_total /= n;
  return summary;
}

Metrics evaluate(const Model& model, const Dataset& data, double lambda) {
  if (data.empty()) throw DataError("evaluate: empty dataset");
  const Taxonomy& tax = model.spec().taxonomy;
  const std::size_t C = tax.size();
  Metrics m;
  m.total = data.size();
  m.confusion.assign(C, std::vector<std::size_t>(C, 0));
  m.class_counts.assign(C, 0);
  std::size_t emo_hits = 0;
  std::size_t pol_hits = 0;
  for (const SampleRecord& s : data) {
    const Vec p = model.forward(s);
    const std::size_t pred = argmax(p);
    ++m.confusion[s.label_index][pred];
    ++m.class_counts[s.label_index];
    if (pred == s.label_index) ++emo_hits;
    if (tax.polarity_of(pred) == tax.polarity_of(s.label_index)) ++pol_hits;
    const LossBreakdown loss = hierarchical_loss(tax, p, s.label_index, lambda);
    m.loss_emo += loss.emotion;
    m.loss_pol += loss.polarity;
    m.loss_total += loss.total;
  }
  const double n = static_cast<double>(data.size());
  m.emotion_accuracy = static_cast<double>(emo_hits) / n;
  m.polarity_accuracy = static_cast<double>(pol_hits) / n;
  m.loss_emo /= n;
  m.loss_pol /= n;
  m.loss_total /= n;
  return m;
}

std::vector<EpochSummary> train_model(Model& model, const Dataset& data, const TrainConfig& config,
                                      const EpochCallback& on_epoch) {
  if (data.empty()) throw DataError("train: empty dataset");
  const Schedule schedule = Schedule::from_config(config);
  Adam adam(model.params());
  // Model::init draws from Rng(seed); batches use a separate stream.
  Rng shuffle_rng(config.seed ^ 0x5851f42d4c957f2dULL);
  std::vector<EpochSummary> history;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    history.push_back(train_epoch(model, adam, data, config, epoch, schedule.lr_at_epoch(epoch), shuffle_rng));
    if (on_epoch) on_epoch(history.back());
  }
  return history;
}

}  // namespace emofuse
