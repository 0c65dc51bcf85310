#include "gfl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "gfl/errors.hpp"

namespace gfl {
namespace {

using nlohmann::json;

// Reads fields from one JSON object and remembers which keys were used, so
// that leftovers can be reported.
class Reader {
 public:
  Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + " must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    used_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError("bad value for '" + name(key) + "': " + it->dump());
    }
  }

  const json* child(const char* key) {
    used_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!used_.count(key)) throw ConfigError("unknown config key '" + name(key) + "'");
    }
  }

 private:
  std::string name(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

  const json& obj_;
  std::string where_;
  std::set<std::string> used_;
};

Aggregator parse_aggregator(const std::string& s) {
  try {
    return aggregator_from_string(s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

ExperimentFile experiment_from_json(const json& doc) {
  ExperimentFile e;
  FLConfig& c = e.fl;
  Reader top(doc, "");
  top.get("K", c.n_clients);
  top.get("R", c.rounds);
  top.get("E", c.local.epochs);
  top.get("eta", c.local.eta);
  top.get("mu", c.local.mu);
  top.get("batch_size", c.local.batch_size);
  top.get("kappa", c.kappa);
  top.get("missing_rate", c.missing_rate);
  top.get("noise_scale", c.noise_scale);
  top.get("init_scale", c.init_scale);
  top.get("seeds", c.seeds);
  top.get("threads", c.threads);
  std::string agg = to_string(c.server.aggregator);
  top.get("aggregator", agg);
  c.server.aggregator = parse_aggregator(agg);
  std::vector<std::string> aggs;
  top.get("aggregators", aggs);
  for (const auto& a : aggs) e.aggregators.push_back(parse_aggregator(a));
  top.get("noise_levels", e.noise_levels);
  top.get("missing_rates", e.missing_rates);
  top.get("out_dir", e.out_dir);

  if (const json* s = top.child("server")) {
    Reader r(*s, "server");
    r.get("mu", c.server.mu);
    r.get("alpha", c.server.alpha);
    r.get("beta", c.server.beta);
    r.get("gamma", c.server.gamma);
    r.get("rho", c.server.rho);
    r.get("epsilon", c.server.epsilon);
    r.get("max_outer", c.server.max_outer);
    r.get("prox_tol", c.server.prox_tol);
    r.get("prox_max_iters", c.server.prox_max_iters);
    r.get("two_step_iters", c.server.two_step_iters);
    r.finish();
  }
  if (const json* d = top.child("data")) {
    Reader r(*d, "data");
    r.get("source", c.data.source);
    r.get("n_samples", c.data.synthetic.n_samples);
    r.get("n_features", c.data.synthetic.n_features);
    r.get("n_classes", c.data.synthetic.n_classes);
    r.get("class_separation", c.data.synthetic.class_separation);
    r.get("within_std", c.data.synthetic.within_std);
    r.get("task_clusters", c.data.task_clusters);
    r.get("mnist_images", c.data.mnist_images);
    r.get("mnist_labels", c.data.mnist_labels);
    r.get("mnist_limit", c.data.mnist_limit);
    r.finish();
  }
  top.finish();

  c.validate();
  for (double s : e.noise_levels)
    if (!(s >= 0.0)) throw ConfigError("noise_levels must be nonnegative");
  for (double m : e.missing_rates)
    if (!(m >= 0.0 && m <= 1.0)) throw ConfigError("missing_rates must lie in [0, 1]");
  return e;
}

json experiment_to_json(const ExperimentFile& e) {
  const FLConfig& c = e.fl;
  json aggs = json::array();
  for (auto a : e.aggregators) aggs.push_back(to_string(a));
  return {
      {"K", c.n_clients},
      {"R", c.rounds},
      {"E", c.local.epochs},
      {"eta", c.local.eta},
      {"mu", c.local.mu},
      {"batch_size", c.local.batch_size},
      {"kappa", c.kappa},
      {"missing_rate", c.missing_rate},
      {"noise_scale", c.noise_scale},
      {"init_scale", c.init_scale},
      {"seeds", c.seeds},
      {"threads", c.threads},
      {"aggregator", to_string(c.server.aggregator)},
      {"aggregators", aggs},
      {"noise_levels", e.noise_levels},
      {"missing_rates", e.missing_rates},
      {"out_dir", e.out_dir},
      {"server",
       {{"mu", c.server.mu},
        {"alpha", c.server.alpha},
        {"beta", c.server.beta},
        {"gamma", c.server.gamma},
        {"rho", c.server.rho},
        {"epsilon", c.server.epsilon},
        {"max_outer", c.server.max_outer},
        {"prox_tol", c.server.prox_tol},
        {"prox_max_iters", c.server.prox_max_iters},
        {"two_step_iters", c.server.two_step_iters}}},
      {"data",
       {{"source", c.data.source},
        {"n_samples", c.data.synthetic.n_samples},
        {"n_features", c.data.synthetic.n_features},
        {"n_classes", c.data.synthetic.n_classes},
        {"class_separation", c.data.synthetic.class_separation},
        {"within_std", c.data.synthetic.within_std},
        {"task_clusters", c.data.task_clusters},
        {"mnist_images", c.data.mnist_images},
        {"mnist_labels", c.data.mnist_labels},
        {"mnist_limit", c.data.mnist_limit}}},
  };
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must look like key=value: " + assignment);
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &doc;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!node->is_object()) throw ConfigError("override path " + key + " crosses a non-object");
    node = &(*node)[path[i]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw ConfigError("override path " + key + " crosses a non-object");
  (*node)[path.back()] = std::move(value);
}

}  // namespace gfl
