#include "emofuse/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "emofuse/error.hpp"
#include "emofuse/model.hpp"
#include "emofuse/model_io.hpp"

namespace emofuse {

std::vector<LossScenario> loss_demo_scenarios() {
  const double spread = (1.0 - 0.1003) / 7.0;
  return {
      {"true", 0, {0.9, 0.03, 0.02, 0.02, 0.0075, 0.0075, 0.0075, 0.0075}},
      {"false", 1, {spread, 0.1003, spread, spread, spread, spread, spread, spread}},
      {"easy false", 1, {0.70, 0.1003, 0.05, 0.0497, 0.025, 0.025, 0.025, 0.025}},
      {"hard false", 1, {0.05, 0.1003, 0.0297, 0.02, 0.70, 0.05, 0.025, 0.025}},
  };
}

std::vector<LossDemoRow> run_loss_demo(double lambda) {
  const Taxonomy tax = mikel_default();
  std::vector<LossDemoRow> rows;
  for (const auto& s : loss_demo_scenarios()) {
    rows.push_back({s.name, hierarchical_loss(tax, s.p_emo, s.target, lambda)});
  }
  return rows;
}

int run_gradcheck_command(const std::vector<GradCheckCase>& cases, std::uint64_t seed, std::ostream& out,
                          std::ostream& err) {
  const GradCheckReport report = run_gradcheck(cases, seed);
  print_gradcheck(report, out);
  if (report.passed()) {
    out << "all " << report.rows.size() << " components passed\n";
    return kExitOk;
  }
  for (const auto& name : report.failing()) err << "FAILED: " << name << "\n";
  return kExitCheckFailed;
}

nlohmann::json metrics_to_json(const Metrics& m, const Taxonomy& t) {
  nlohmann::json labels = nlohmann::json::array();
  for (std::size_t c = 0; c < t.size(); ++c) labels.push_back(t.name_of(c));
  return {
      {"total", m.total},
      {"emotion_accuracy", m.emotion_accuracy},
      {"polarity_accuracy", m.polarity_accuracy},
      {"loss_emo", m.loss_emo},
      {"loss_pol", m.loss_pol},
      {"loss_total", m.loss_total},
      {"labels", labels},
      {"class_counts", m.class_counts},
      {"confusion", m.confusion},
  };
}

SweepParam sweep_param_from_string(const std::string& s) {
  if (s == "lambda") return SweepParam::lambda;
  if (s == "N" || s == "n" || s == "n_max") return SweepParam::n_max;
  throw ConfigError("unknown sweep parameter '" + s + "' (expected lambda or N)");
}

std::string to_string(SweepParam p) { return p == SweepParam::lambda ? "lambda" : "N"; }

std::vector<double> parse_values(const std::string& s) {
  std::vector<double> values;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) throw ConfigError("--values: empty entry in '" + s + "'");
    const auto last = item.find_last_not_of(" \t");
    const std::string_view tok(item.data() + first, last - first + 1);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || end != tok.data() + tok.size() || !std::isfinite(v)) {
      throw ConfigError("--values: cannot parse '" + std::string(tok) + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw ConfigError("--values: empty list");
  return values;
}

namespace {

TrainConfig with_value(TrainConfig c, SweepParam param, double value) {
  if (param == SweepParam::lambda) {
    c.lambda = value;
  } else {
    if (value < 0.0 || value != std::floor(value)) throw ConfigError("N values must be non-negative integers");
    c.n_max = static_cast<std::size_t>(value);
  }
  c.validate();
  return c;
}

std::size_t face_width(const Dataset& data, std::size_t fallback) {
  for (const auto& r : data) {
    if (r.face.present()) return r.face.raw->size();
  }
  return fallback;
}

/// Checks every record against the model's input widths and taxonomy.
template <class Err>
void check_inputs(const Dataset& data, const ModelSpec& spec) {
  for (const auto& r : data) {
    if (r.global.size() != spec.raw_global) {
      throw Err("record '" + r.id + "': global has " + std::to_string(r.global.size()) + " values, expected " +
                std::to_string(spec.raw_global));
    }
    if (r.objects.rows() > 0 && r.objects.cols() != spec.dims.F) {
      throw Err("record '" + r.id + "': objects have width " + std::to_string(r.objects.cols()) + ", expected " +
                std::to_string(spec.dims.F));
    }
    if (r.face.present() && r.face.raw->size() != spec.raw_face) {
      throw Err("record '" + r.id + "': face has " + std::to_string(r.face.raw->size()) + " values, expected " +
                std::to_string(spec.raw_face));
    }
    if (r.label_index >= spec.taxonomy.size()) throw Err("record '" + r.id + "': label outside the taxonomy");
  }
}

Model build_model(const TrainConfig& c, const Dataset& train) {
  if (train.empty()) throw DataError("training set is empty");
  const ModelSpec spec = ModelSpec::from_config(c, train.front().global.size(), face_width(train, c.dims.d3));
  check_inputs<DataError>(train, spec);
  try {
    Model m(spec);
    m.init(c.seed);
    return m;
  } catch (const ShapeError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

}  // namespace

std::vector<SweepRow> run_sweep(SweepParam param, const std::vector<double>& values, const TrainConfig& config,
                                const Dataset& train, const Dataset& test) {
  if (values.empty()) throw ConfigError("sweep: empty values list");
  std::vector<TrainConfig> configs;
  for (double v : values) configs.push_back(with_value(config, param, v));
  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const TrainConfig& c = configs[k];
    Dataset tr = train, te = test;
    truncate_objects(tr, c.n_max);
    truncate_objects(te, c.n_max);
    Model model = build_model(c, tr);
    const auto epochs = train_model(model, tr, c);
    SweepRow row;
    row.value = values[k];
    row.metrics = evaluate(model, te, c.lambda);
    if (!epochs.empty()) row.last_epoch = epochs.back();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_csv(SweepParam param, const std::vector<SweepRow>& rows) {
  std::string csv = to_string(param) +
                    ",emotion_acc,polarity_acc,test_loss_emo,test_loss_pol,test_loss_total,train_loss_emo,"
                    "train_loss_pol,train_loss_total\n";
  auto num = [](double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  for (const auto& r : rows) {
    csv += num(r.value) + "," + num(r.metrics.emotion_accuracy) + "," + num(r.metrics.polarity_accuracy) + "," +
           num(r.metrics.loss_emo) + "," + num(r.metrics.loss_pol) + "," + num(r.metrics.loss_total) + "," +
           num(r.last_epoch.loss_emo) + "," + num(r.last_epoch.loss_pol) + "," + num(r.last_epoch.loss_total) + "\n";
  }
  return csv;
}

namespace {

struct Options {
  std::string config;
  std::string data;
  std::optional<std::string> synth;
  std::string model;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string param;
  std::string values;
};

nlohmann::json read_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string(what) + ": cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
  if (!f) throw ConfigError("cannot write '" + path + "'");
}

TrainConfig resolve_config(const Options& o) {
  const TrainConfig base = o.synth ? TrainConfig::synthetic() : TrainConfig::reference();
  TrainConfig c = o.config.empty() ? base : load_config(o.config, base);
  if (o.seed) c.seed = *o.seed;
  c.validate();
  return c;
}

SynthSpec resolve_synth(const Options& o, const TrainConfig& c) {
  SynthSpec s;
  s.taxonomy = c.taxonomy;
  s.object_dim = c.dims.F;
  if (o.synth && !o.synth->empty()) {
    const nlohmann::json j = read_json_file(*o.synth, "synth");
    s = synth_spec_from_json(j);
    if (!j.contains("taxonomy")) s.taxonomy = c.taxonomy;
    if (!j.contains("object_dim")) s.object_dim = c.dims.F;
    if (!(s.taxonomy == c.taxonomy)) throw ConfigError("synth taxonomy differs from the config taxonomy");
  }
  s.validate();
  return s;
}

struct RunData {
  Dataset train, val, test;
  nlohmann::json source;
};

RunData load_run_data(const Options& o, const TrainConfig& c, std::size_t parse_n_max, std::ostream& err) {
  if (o.synth && !o.data.empty()) throw ConfigError("--data and --synth are mutually exclusive");
  if (!o.synth && o.data.empty()) throw ConfigError("one of --data or --synth is required");
  RunData d;
  if (o.synth) {
    const SynthSpec spec = resolve_synth(o, c);
    SynthData s = synth_generate(spec);
    truncate_objects(s.train, parse_n_max);
    truncate_objects(s.test, parse_n_max);
    d.train = std::move(s.train);
    d.test = std::move(s.test);
    d.source = {{"kind", "synth"}, {"spec", synth_spec_to_json(spec)}};
  } else {
    const Dataset all = parse_jsonl(o.data, c.taxonomy, parse_n_max, err);
    if (all.empty()) throw DataError("data file '" + o.data + "' has no records");
    Splits s = split_dataset(all, c.split, c.seed);
    d.train = std::move(s.train);
    d.val = std::move(s.val);
    d.test = std::move(s.test);
    d.source = {{"kind", "jsonl"}, {"path", o.data}, {"records", all.size()}};
  }
  d.source["train"] = d.train.size();
  d.source["val"] = d.val.size();
  d.source["test"] = d.test.size();
  return d;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  const TrainConfig c = resolve_config(o);
  const RunData d = load_run_data(o, c, c.n_max, err);
  if (d.test.empty()) throw DataError("test split is empty");
  const auto t0 = std::chrono::steady_clock::now();
  Model model = build_model(c, d.train);
  check_inputs<DataError>(d.test, model.spec());
  check_inputs<DataError>(d.val, model.spec());

  nlohmann::json epochs = nlohmann::json::array();
  train_model(model, d.train, c, [&](const EpochSummary& e) {
    char line[160];
    std::snprintf(line, sizeof line, "epoch %3zu  lr %.3e  L_emo %.6f  L_pol %.6f  L_total %.6f\n", e.epoch + 1, e.lr,
                  e.loss_emo, e.loss_pol, e.loss_total);
    out << line << std::flush;
    epochs.push_back({{"epoch", e.epoch + 1},
                      {"lr", e.lr},
                      {"loss_emo", e.loss_emo},
                      {"loss_pol", e.loss_pol},
                      {"loss_total", e.loss_total}});
  });

  const Metrics test = evaluate(model, d.test, c.lambda);
  nlohmann::json final_metrics = {{"test", metrics_to_json(test, c.taxonomy)}};
  if (!d.val.empty()) final_metrics["val"] = metrics_to_json(evaluate(model, d.val, c.lambda), c.taxonomy);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string model_path = o.model.empty() ? "model.bin" : o.model;
  const std::string report_path = o.out.empty() ? "report.json" : o.out;
  const ModelSpec& spec = model.spec();
  nlohmann::json report = {
      {"command", "train"},
      {"config", config_to_json(c)},
      {"data", d.source},
      {"model", {{"raw_global", spec.raw_global}, {"raw_face", spec.raw_face}, {"parameters", [&] {
                   std::size_t n = 0;
                   for (const Param* p : std::as_const(model).params()) n += p->value.size();
                   return n;
                 }()}}},
      {"epochs", epochs},
      {"final", final_metrics},
  };
  save_model(model_path, model);
  write_text(report_path, report.dump(2) + "\n");

  char line[200];
  std::snprintf(line, sizeof line, "test: emotion accuracy %.4f  polarity accuracy %.4f  (%zu samples, %.1f s)\n",
                test.emotion_accuracy, test.polarity_accuracy, test.total, seconds);
  out << line << "model: " << model_path << "\nreport: " << report_path << "\n";
  return kExitOk;
}

void print_metrics(const Metrics& m, const Taxonomy& t, std::ostream& out) {
  char line[256];
  std::snprintf(line, sizeof line, "samples %zu  emotion accuracy %.4f  polarity accuracy %.4f\n", m.total,
                m.emotion_accuracy, m.polarity_accuracy);
  out << line;
  std::snprintf(line, sizeof line, "loss: L_emo %.6f  L_pol %.6f  L_total %.6f\n", m.loss_emo, m.loss_pol,
                m.loss_total);
  out << line << "confusion (rows true, columns predicted):\n";
  std::snprintf(line, sizeof line, "%12s", "");
  out << line;
  for (std::size_t c = 0; c < t.size(); ++c) {
    std::snprintf(line, sizeof line, " %6.6s", t.name_of(c).c_str());
    out << line;
  }
  out << "\n";
  for (std::size_t r = 0; r < t.size(); ++r) {
    std::snprintf(line, sizeof line, "%12.12s", t.name_of(r).c_str());
    out << line;
    for (std::size_t c = 0; c < t.size(); ++c) {
      std::snprintf(line, sizeof line, " %6zu", m.confusion[r][c]);
      out << line;
    }
    out << "\n";
  }
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.model.empty()) throw ConfigError("eval requires --model");
  Model model = load_model(o.model);
  const ModelSpec& spec = model.spec();
  TrainConfig c = resolve_config(o);
  if (!o.config.empty()) {
    if (!(c.dims == spec.dims)) throw ModelMismatchError("config dims differ from the model's");
    if (!(c.taxonomy == spec.taxonomy)) throw ModelMismatchError("config taxonomy differs from the model's");
    if (c.semantic != spec.semantic || c.encoder != spec.encoder) {
      throw ModelMismatchError("config architecture differs from the model's");
    }
  }
  c.taxonomy = spec.taxonomy;
  c.dims = spec.dims;
  c.n_max = spec.n_max;
  c.t_steps = spec.t_steps;
  if (o.config.empty()) c.lambda = spec.lambda;

  Dataset data;
  if (o.synth) {
    if (!o.data.empty()) throw ConfigError("--data and --synth are mutually exclusive");
    SynthData s = synth_generate(resolve_synth(o, c));
    truncate_objects(s.test, spec.n_max);
    data = std::move(s.test);
  } else {
    if (o.data.empty()) throw ConfigError("one of --data or --synth is required");
    data = parse_jsonl(o.data, spec.taxonomy, spec.n_max, err);
  }
  if (data.empty()) throw DataError("dataset is empty");
  check_inputs<ModelMismatchError>(data, spec);

  const Metrics m = evaluate(model, data, c.lambda);
  if (!o.out.empty()) write_text(o.out, metrics_to_json(m, spec.taxonomy).dump(2) + "\n");
  print_metrics(m, spec.taxonomy, out);
  return kExitOk;
}

int cmd_loss_demo(const Options& o, std::ostream& out) {
  const auto rows = run_loss_demo(1.0);
  char line[128];
  std::snprintf(line, sizeof line, "%-12s %10s %10s %10s\n", "scenario", "L_emo", "L_pol", "L_total");
  out << line;
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-12s %10.4f %10.4f %10.4f\n", r.name.c_str(), r.loss.emotion, r.loss.polarity,
                  r.loss.total);
    out << line;
    j.push_back({{"scenario", r.name},
                 {"loss_emo", r.loss.emotion},
                 {"loss_pol", r.loss.polarity},
                 {"lambda", r.loss.lambda},
                 {"loss_total", r.loss.total}});
  }
  if (!o.out.empty()) write_text(o.out, j.dump(2) + "\n");
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.param.empty()) throw ConfigError("sweep requires --param lambda|N");
  const SweepParam param = sweep_param_from_string(o.param);
  const std::vector<double> values = parse_values(o.values);
  const TrainConfig c = resolve_config(o);
  for (double v : values) with_value(c, param, v);

  std::size_t parse_n_max = c.n_max;
  if (param == SweepParam::n_max) parse_n_max = static_cast<std::size_t>(*std::max_element(values.begin(), values.end()));
  const RunData d = load_run_data(o, c, parse_n_max, err);
  if (d.test.empty()) throw DataError("test split is empty");

  const auto rows = run_sweep(param, values, c, d.train, d.test);
  const std::string csv = sweep_csv(param, rows);
  if (o.out.empty()) {
    out << csv;
  } else {
    write_text(o.out, csv);
    out << csv;
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"emofuse: stimuli-aware emotion classifier"};
  app.require_subcommand(1);
  Options o;
  std::string synth_value;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config file");
    sub->add_option("--seed", o.seed, "override the config seed");
    sub->add_option("--out", o.out, "output path");
  };
  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--data", o.data, "JSON-lines data file");
    sub->add_option("--synth", synth_value, "use synthetic data (optional spec JSON)")->expected(0, 1);
  };

  auto* train = app.add_subcommand("train", "train a model and write a report");
  add_common(train);
  add_data(train);
  train->add_option("--model", o.model, "model file to write");

  auto* eval = app.add_subcommand("eval", "evaluate a saved model");
  add_common(eval);
  add_data(eval);
  eval->add_option("--model", o.model, "model file to read")->required();

  auto* grad = app.add_subcommand("grad-check", "finite-difference gradient verification");
  grad->add_option("--seed", o.seed, "base seed");

  auto* demo = app.add_subcommand("loss-demo", "hierarchical loss on the four canonical cases");
  demo->add_option("--out", o.out, "also write the table as JSON");

  auto* sweep = app.add_subcommand("sweep", "train + eval once per parameter value, CSV out");
  add_common(sweep);
  add_data(sweep);
  sweep->add_option("--param", o.param, "lambda or N")->required();
  sweep->add_option("--values", o.values, "comma-separated values")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  for (auto* sub : {train, eval, sweep}) {
    if (sub->parsed() && sub->count("--synth") > 0) o.synth = synth_value;
  }

  try {
    if (train->parsed()) return cmd_train(o, out, err);
    if (eval->parsed()) return cmd_eval(o, out, err);
    if (grad->parsed()) return run_gradcheck_command(default_gradcheck_cases(), o.seed.value_or(1), out, err);
    if (demo->parsed()) return cmd_loss_demo(o, out);
    if (sweep->parsed()) return cmd_sweep(o, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ModelMismatchError& e) {
    err << "model mismatch: " << e.what() << "\n";
    return kExitModelMismatch;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitConfig;
}

}  // namespace emofuse
