#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gradft/data.hpp"
#include "gradft/gradual.hpp"
#include "gradft/model.hpp"

namespace gradft {

// %.17g is enough for an exact double round trip and prints identically
// across runs, so serialized files are byte-stable.
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& tok, const std::string& context) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw Error(context + ": bad number '" + tok + "'");
  }
  if (pos != tok.size()) throw Error(context + ": bad number '" + tok + "'");
  return v;
}

// ---- dataset files -------------------------------------------------------
//
// Line-delimited, human-inspectable:
//   gradft-dataset v1 feature_dim=<d> num_classes=<k>
//   <in|out> <label> <f0> <f1> ...

inline void save_dataset(const Dataset& d, std::ostream& os) {
  os << "gradft-dataset v1 feature_dim=" << d.feature_dim << " num_classes=" << d.num_classes
     << "\n";
  for (const Example& ex : d.examples) {
    os << domain_tag(ex.domain) << " " << ex.label;
    for (double f : ex.features) os << " " << fmt_double(f);
    os << "\n";
  }
}

inline void save_dataset(const Dataset& d, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  save_dataset(d, os);
  if (!os) throw Error("write failed for '" + path + "'");
}

inline Dataset load_dataset(std::istream& is, const std::string& name = "<stream>") {
  std::string header;
  if (!std::getline(is, header)) throw Error(name + ": empty file, expected header");
  Dataset d;
  {
    std::istringstream hs(header);
    std::string magic, version, fd, nc;
    hs >> magic >> version >> fd >> nc;
    if (magic != "gradft-dataset" || version != "v1" || fd.rfind("feature_dim=", 0) != 0 ||
        nc.rfind("num_classes=", 0) != 0)
      throw Error(name + ": line 1: bad header '" + header + "'");
    d.feature_dim = std::stoull(fd.substr(12));
    d.num_classes = std::stoull(nc.substr(12));
  }
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string context = name + ": line " + std::to_string(lineno);
    Example ex;
    std::string tag, label_tok;
    if (!(ls >> tag >> label_tok)) throw Error(context + ": malformed record");
    if (tag == "in")
      ex.domain = Domain::InDomain;
    else if (tag == "out")
      ex.domain = Domain::OutOfDomain;
    else
      throw Error(context + ": unknown domain tag '" + tag + "'");
    ex.label = static_cast<int>(parse_double(label_tok, context));
    if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= d.num_classes)
      throw Error(context + ": label " + label_tok + " out of range");
    std::string tok;
    while (ls >> tok) ex.features.push_back(parse_double(tok, context));
    if (ex.features.size() != d.feature_dim)
      throw Error(context + ": expected " + std::to_string(d.feature_dim) + " features, got " +
                  std::to_string(ex.features.size()));
    d.examples.push_back(std::move(ex));
  }
  return d;
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "'");
  return load_dataset(is, path);
}

// ---- model checkpoints ---------------------------------------------------

inline void save_model(const Model& m, std::ostream& os) {
  os << "gradft-model v1\n";
  os << "feature_dim " << m.spec.feature_dim << "\n";
  os << "num_classes " << m.spec.num_classes << "\n";
  os << "hidden_dim " << m.spec.hidden_dim << "\n";
  os << "init_scale " << fmt_double(m.spec.init_scale) << "\n";
  os << "params " << m.params.size() << "\n";
  for (double p : m.params) os << fmt_double(p) << "\n";
}

inline void save_model(const Model& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  save_model(m, os);
  if (!os) throw Error("write failed for '" + path + "'");
}

inline Model load_model(std::istream& is, const std::string& name = "<stream>") {
  std::string magic, version;
  is >> magic >> version;
  if (magic != "gradft-model" || version != "v1") throw Error(name + ": bad model header");
  Model m;
  std::string key;
  std::size_t n_params = 0;
  while (is >> key) {
    if (key == "feature_dim")
      is >> m.spec.feature_dim;
    else if (key == "num_classes")
      is >> m.spec.num_classes;
    else if (key == "hidden_dim")
      is >> m.spec.hidden_dim;
    else if (key == "init_scale")
      is >> m.spec.init_scale;
    else if (key == "params") {
      is >> n_params;
      break;
    } else
      throw Error(name + ": unknown model field '" + key + "'");
  }
  if (n_params != m.spec.param_count())
    throw Error(name + ": parameter count does not match spec");
  m.params.resize(n_params);
  for (std::size_t i = 0; i < n_params; ++i) {
    if (!(is >> m.params[i])) throw Error(name + ": truncated parameter block");
  }
  return m;
}

inline Model load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "'");
  return load_model(is, path);
}

// ---- run reports (JSON) --------------------------------------------------
//
// wall-clock time is deliberately excluded; report bytes are a pure
// function of config + seed. Timings go to a sidecar file.

inline nlohmann::json metrics_to_json(const Metrics& m) {
  nlohmann::json j;
  j["accuracy"] = m.accuracy;
  j["mean_loss"] = m.mean_loss;
  j["n"] = m.n;
  nlohmann::json pca = nlohmann::json::array();
  for (const auto& v : m.per_class_accuracy) {
    if (v)
      pca.push_back(*v);
    else
      pca.push_back(nullptr);
  }
  j["per_class_accuracy"] = pca;
  return j;
}

inline Metrics metrics_from_json(const nlohmann::json& j) {
  Metrics m;
  m.accuracy = j.at("accuracy").get<double>();
  m.mean_loss = j.at("mean_loss").get<double>();
  m.n = j.at("n").get<std::size_t>();
  for (const auto& v : j.at("per_class_accuracy")) {
    if (v.is_null())
      m.per_class_accuracy.push_back(std::nullopt);
    else
      m.per_class_accuracy.push_back(v.get<double>());
  }
  return m;
}

inline nlohmann::json report_to_json(const RunReport& r) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["regime"] = r.regime;
  j["schedule"] = r.schedule;
  j["master_seed"] = r.master_seed;
  nlohmann::json stages = nlohmann::json::array();
  for (const StageReport& s : r.stages) {
    nlohmann::json sj;
    sj["stage_index"] = s.stage_index;
    sj["out_count"] = s.out_count;
    sj["train_size"] = s.train_size;
    sj["learning_rate"] = s.learning_rate;
    sj["epochs_run"] = s.epochs_run;
    sj["best_epoch"] = s.best_epoch;
    sj["dev"] = metrics_to_json(s.dev);
    sj["test"] = metrics_to_json(s.test);
    stages.push_back(sj);
  }
  j["stages"] = stages;
  j["final_dev"] = metrics_to_json(r.final_dev);
  j["final_test"] = metrics_to_json(r.final_test);
  return j;
}

inline RunReport report_from_json(const nlohmann::json& j) {
  if (j.at("format_version").get<int>() != 1) throw Error("unsupported report format version");
  RunReport r;
  r.regime = j.at("regime").get<std::string>();
  r.schedule = j.at("schedule").get<std::string>();
  r.master_seed = j.at("master_seed").get<std::uint64_t>();
  for (const auto& sj : j.at("stages")) {
    StageReport s;
    s.stage_index = sj.at("stage_index").get<std::size_t>();
    s.out_count = sj.at("out_count").get<std::size_t>();
    s.train_size = sj.at("train_size").get<std::size_t>();
    s.learning_rate = sj.at("learning_rate").get<double>();
    s.epochs_run = sj.at("epochs_run").get<std::size_t>();
    s.best_epoch = sj.at("best_epoch").get<std::size_t>();
    s.dev = metrics_from_json(sj.at("dev"));
    s.test = metrics_from_json(sj.at("test"));
    r.stages.push_back(std::move(s));
  }
  r.final_dev = metrics_from_json(j.at("final_dev"));
  r.final_test = metrics_from_json(j.at("final_test"));
  return r;
}

inline void save_report(const RunReport& r, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << report_to_json(r).dump(2) << "\n";
  if (!os) throw Error("write failed for '" + path + "'");
}

inline RunReport load_report(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": " + e.what());
  }
  return report_from_json(j);
}

}  // namespace gradft
