#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "emofuse/config.hpp"
#include "emofuse/model.hpp"
#include "emofuse/rng.hpp"
#include "emofuse/sample.hpp"

namespace emofuse {

/// Step decay: base_lr * decay_factor^floor(epoch / decay_every).
struct Schedule {
  double base_lr = 5e-5;
  double decay_factor = 0.1;
  std::size_t decay_every = 5;
  std::size_t total_epochs = 50;

  static Schedule from_config(const TrainConfig& c) { return {c.lr, c.decay_factor, c.decay_every, c.epochs}; }
  /// Throws std::out_of_range for epoch >= total_epochs.
  double lr_at_epoch(std::size_t epoch) const;
};

/// Adam with bias correction (beta1 0.9, beta2 0.999, eps 1e-8).
class Adam {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  explicit Adam(std::vector<Param*> params);

  /// Coupled decay adds weight_decay * theta to the gradient; decoupled decay
  /// shrinks theta by lr * weight_decay directly. Zeroes every gradient.
  void step(double lr, double weight_decay, bool decoupled = false);
  std::uint64_t steps() const { return t_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }

 private:
  std::vector<Param*> params_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::uint64_t t_ = 0;
};

struct EpochSummary {
  std::size_t epoch = 0;
  double lr = 0.0;
  double loss_emo = 0.0;
  double loss_pol = 0.0;
  double loss_total = 0.0;
};

/// One pass over `data` in an order shuffled by `shuffle_rng`, in batches of
/// config.batch_size: forward, hierarchical loss (mean over the batch),
/// backward, Adam step. Reported losses are means over all samples.
/// Throws DataError on an empty dataset.
EpochSummary train_epoch(Model& model, Adam& adam, const Dataset& data, const TrainConfig& config, std::size_t epoch,
                         double lr, Rng& shuffle_rng);

struct Metrics {
  std::size_t total = 0;
  double emotion_accuracy = 0.0;
  double polarity_accuracy = 0.0;
  /// confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<std::size_t> class_counts;
  double loss_emo = 0.0;
  double loss_pol = 0.0;
  double loss_total = 0.0;
};

/// Argmax prediction per sample (ties to the lowest index); polarity is the
/// taxonomy polarity of the predicted emotion. Throws DataError when empty.
Metrics evaluate(const Model& model, const Dataset& data, double lambda);

using EpochCallback = std::function<void(const EpochSummary&)>;

/// Runs config.epochs epochs with the step schedule. The shuffle stream is
/// derived from config.seed, independently of the init stream.
std::vector<EpochSummary> train_model(Model& model, const Dataset& data, const TrainConfig& config,
                                      const EpochCallback& on_epoch = {});

}  // namespace emofuse
