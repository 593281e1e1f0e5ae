#pragma once

// Global forecasting learners behind one fit/predict interface. Every learner is trained on rows
// pooled across all series and produces multi-step forecasts recursively.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "retrainbench/core.hpp"
#include "retrainbench/features.hpp"
#include "retrainbench/panel.hpp"
#include "retrainbench/random.hpp"
#include "retrainbench/tree.hpp"

namespace retrainbench {

enum class ModelKind { seasonal_naive, pooled_linear, pooled_ridge, mlp, gbt, random_forest };

inline std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::seasonal_naive: return "seasonal-naive";
    case ModelKind::pooled_linear: return "pooled-linear";
    case ModelKind::pooled_ridge: return "pooled-ridge";
    case ModelKind::mlp: return "mlp";
    case ModelKind::gbt: return "gbt";
    case ModelKind::random_forest: return "random-forest";
  }
  return "unknown";
}

inline ModelKind parse_model_kind(std::string_view text) {
  for (auto k : {ModelKind::seasonal_naive, ModelKind::pooled_linear, ModelKind::pooled_ridge, ModelKind::mlp,
                 ModelKind::gbt, ModelKind::random_forest})
    if (to_string(k) == text) return k;
  throw Error("unknown model kind '" + std::string(text) + "'");
}

// Hyperparameter defaults per kind. Keys outside this table are rejected.
inline const std::map<std::string, double>& default_hyperparameters(ModelKind kind) {
  static const std::map<std::string, double> naive{{"period", 7}};
  static const std::map<std::string, double> linear{};
  static const std::map<std::string, double> ridge{{"lambda", 1.0}};
  static const std::map<std::string, double> mlp{{"hidden", 32},      {"layers", 1},      {"epochs", 30},
                                                 {"batch_size", 64},  {"learning_rate", 0.01}, {"momentum", 0.9}};
  static const std::map<std::string, double> gbt{
      {"trees", 100}, {"depth", 3}, {"learning_rate", 0.1}, {"min_leaf", 1}};
  static const std::map<std::string, double> forest{
      {"trees", 50}, {"depth", 8}, {"feature_fraction", 1.0 / 3.0}, {"min_leaf", 5}};
  switch (kind) {
    case ModelKind::seasonal_naive: return naive;
    case ModelKind::pooled_linear: return linear;
    case ModelKind::pooled_ridge: return ridge;
    case ModelKind::mlp: return mlp;
    case ModelKind::gbt: return gbt;
    case ModelKind::random_forest: return forest;
  }
  return linear;
}

struct ModelSpec {
  std::string name;
  ModelKind kind = ModelKind::pooled_linear;
  std::map<std::string, double> hyperparameters;
  std::uint64_t seed = 0;

  double param(const std::string& key) const {
    if (auto it = hyperparameters.find(key); it != hyperparameters.end()) return it->second;
    const auto& defaults = default_hyperparameters(kind);
    if (auto it = defaults.find(key); it != defaults.end()) return it->second;
    throw Error("model '" + name + "': no hyperparameter '" + key + "'");
  }

  void validate() const {
    const auto& defaults = default_hyperparameters(kind);
    for (const auto& [key, value] : hyperparameters) {
      if (!defaults.count(key))
        throw Error("model '" + name + "' (" + std::string(to_string(kind)) + "): unknown hyperparameter '" + key + "'");
      if (!std::isfinite(value)) throw Error("model '" + name + "': hyperparameter '" + key + "' must be finite");
    }
    auto at_least = [&](const char* key, double lo) {
      if (param(key) < lo)
        throw Error("model '" + name + "': hyperparameter '" + key + "' must be >= " + format_double(lo));
    };
    auto integral = [&](const char* key) {
      if (param(key) != std::floor(param(key)))
        throw Error("model '" + name + "': hyperparameter '" + key + "' must be an integer");
    };
    switch (kind) {
      case ModelKind::seasonal_naive: at_least("period", 1); integral("period"); break;
      case ModelKind::pooled_linear: break;
      case ModelKind::pooled_ridge: at_least("lambda", 0); break;
      case ModelKind::mlp:
        for (const char* k : {"hidden", "layers", "epochs", "batch_size"}) {
          at_least(k, 1);
          integral(k);
        }
        at_least("learning_rate", 0);
        at_least("momentum", 0);
        if (param("momentum") >= 1) throw Error("model '" + name + "': momentum must be < 1");
        break;
      case ModelKind::gbt:
        for (const char* k : {"trees", "depth"}) {
          at_least(k, 1);
          integral(k);
        }
        at_least("learning_rate", 0);
        at_least("min_leaf", 1);
        break;
      case ModelKind::random_forest:
        for (const char* k : {"trees", "depth"}) {
          at_least(k, 1);
          integral(k);
        }
        at_least("min_leaf", 1);
        if (param("feature_fraction") <= 0 || param("feature_fraction") > 1)
          throw Error("model '" + name + "': feature_fraction must lie in (0, 1]");
        break;
    }
  }
};

class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual double predict(std::span<const double> row) const = 0;
};

// ---------------------------------------------------------------------------------------------
// Linear least squares on standardized columns, with optional ridge penalty (intercept unpenalized).

class LinearRegressor final : public Regressor {
 public:
  LinearRegressor(double intercept, std::vector<double> coef) : intercept_(intercept), coef_(std::move(coef)) {}

  double predict(std::span<const double> row) const override {
    double v = intercept_;
    for (std::size_t j = 0; j < coef_.size(); ++j) v += coef_[j] * row[j];
    return v;
  }
  double intercept() const { return intercept_; }
  const std::vector<double>& coefficients() const { return coef_; }

 private:
  double intercept_;
  std::vector<double> coef_;
};

namespace detail {

struct Standardizer {
  std::vector<double> mean, scale;

  static Standardizer fit(const FeatureMatrix& m) {
    const std::size_t d = m.cols();
    Standardizer s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    for (std::size_t r = 0; r < m.rows; ++r)
      for (std::size_t j = 0; j < d; ++j) s.mean[j] += m.x[r * d + j];
    for (auto& v : s.mean) v /= static_cast<double>(m.rows);
    for (std::size_t r = 0; r < m.rows; ++r)
      for (std::size_t j = 0; j < d; ++j) {
        const double c = m.x[r * d + j] - s.mean[j];
        s.scale[j] += c * c;
      }
    for (auto& v : s.scale) v = std::sqrt(v / static_cast<double>(m.rows));
    return s;
  }
};

inline void check_matrix(const FeatureMatrix& m) {
  if (m.rows == 0) throw Error("fit: feature matrix is empty");
  for (double v : m.x)
    if (!std::isfinite(v)) throw Error("fit: non-finite feature value");
  for (double v : m.y)
    if (!std::isfinite(v)) throw Error("fit: non-finite target value");
}

inline std::shared_ptr<const LinearRegressor> fit_linear(const FeatureMatrix& m, std::optional<double> ridge) {
  const std::size_t d = m.cols();
  const auto st = Standardizer::fit(m);
  double ymean = 0.0;
  for (double v : m.y) ymean += v;
  ymean /= static_cast<double>(m.rows);

  // Constant columns: singular for plain least squares, zero coefficient under ridge.
  std::vector<char> active(d, 1);
  for (std::size_t j = 0; j < d; ++j)
    if (!(st.scale[j] > 1e-12 * std::max(1.0, std::abs(st.mean[j])))) {
      if (!ridge)
        throw Error("fit: singular normal equations (feature '" + m.columns[j] +
                    "' is constant); use pooled-ridge with a positive penalty");
      active[j] = 0;
    }

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  std::vector<double> z(d);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t j = 0; j < d; ++j)
      z[j] = active[j] ? (m.x[r * d + j] - st.mean[j]) / st.scale[j] : 0.0;
    const double yc = m.y[r] - ymean;
    for (std::size_t a = 0; a < d; ++a) {
      if (!active[a]) continue;
      rhs(static_cast<Eigen::Index>(a)) += z[a] * yc;
      for (std::size_t b = a; b < d; ++b) gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += z[a] * z[b];
    }
  }
  gram = gram.selfadjointView<Eigen::Upper>();
  const double n = static_cast<double>(m.rows);
  gram /= n;
  rhs /= n;
  for (std::size_t j = 0; j < d; ++j)
    if (!active[j]) gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = 1.0;

  Eigen::VectorXd beta;
  if (ridge) {
    for (std::size_t j = 0; j < d; ++j)
      if (active[j]) gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += *ridge / n;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success) throw Error("fit: ridge system could not be factorized");
    beta = ldlt.solve(rhs);
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(d))
      throw Error("fit: singular normal equations (collinear features); use pooled-ridge with a positive penalty");
    beta = qr.solve(rhs);
  }

  std::vector<double> coef(d, 0.0);
  double intercept = ymean;
  for (std::size_t j = 0; j < d; ++j) {
    if (!active[j]) continue;
    coef[j] = beta(static_cast<Eigen::Index>(j)) / st.scale[j];
    intercept -= coef[j] * st.mean[j];
  }
  return std::make_shared<LinearRegressor>(intercept, std::move(coef));
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// Multilayer perceptron: ReLU hidden layers, linear output, squared error, mini-batch gradient
// descent with momentum. Inputs and target are standardized with training statistics.

class Mlp {
 public:
  Mlp() = default;
  Mlp(std::size_t inputs, std::vector<std::size_t> hidden) : inputs_(inputs), hidden_(std::move(hidden)) {
    std::size_t fan_in = inputs_;
    for (std::size_t h : hidden_) {
      offsets_.push_back(params_size_);
      params_size_ += h * fan_in + h;
      fan_in = h;
    }
    offsets_.push_back(params_size_);
    params_size_ += fan_in + 1;
    params_.assign(params_size_, 0.0);
  }

  std::size_t parameter_count() const { return params_size_; }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  // He-uniform weights, zero biases.
  void initialize(Rng& rng) {
    std::size_t fan_in = inputs_;
    for (std::size_t l = 0; l <= hidden_.size(); ++l) {
      const std::size_t out = l < hidden_.size() ? hidden_[l] : 1;
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
      double* w = &params_[offsets_[l]];
      for (std::size_t i = 0; i < out * fan_in; ++i) w[i] = rng.uniform(-bound, bound);
      for (std::size_t i = 0; i < out; ++i) w[out * fan_in + i] = 0.0;
      fan_in = out;
    }
  }

  double forward(std::span<const double> params, std::span<const double> x) const {
    std::vector<double> a(x.begin(), x.end()), next;
    std::size_t fan_in = inputs_;
    for (std::size_t l = 0; l <= hidden_.size(); ++l) {
      const std::size_t out = l < hidden_.size() ? hidden_[l] : 1;
      const double* w = &params[offsets_[l]];
      const double* b = w + out * fan_in;
      next.assign(out, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        double s = b[o];
        for (std::size_t i = 0; i < fan_in; ++i) s += w[o * fan_in + i] * a[i];
        next[o] = (l < hidden_.size() && s < 0.0) ? 0.0 : s;
      }
      a.swap(next);
      fan_in = out;
    }
    return a[0];
  }

  double predict(std::span<const double> x) const { return forward(params_, x); }

  // Mean of 0.5 * (f(x) - y)^2 over `rows` of row-major X; gradient written to `grad`.
  double loss_and_gradient(std::span<const double> params, std::span<const double> X, std::span<const double> y,
                           std::span<const std::size_t> rows, std::span<double> grad) const {
    std::fill(grad.begin(), grad.end(), 0.0);
    const std::size_t layers = hidden_.size() + 1;
    std::vector<std::vector<double>> act(layers + 1);
    std::vector<double> delta, prev_delta;
    double loss = 0.0;
    for (std::size_t r : rows) {
      act[0].assign(X.begin() + static_cast<std::ptrdiff_t>(r * inputs_),
                    X.begin() + static_cast<std::ptrdiff_t>((r + 1) * inputs_));
      std::size_t fan_in = inputs_;
      for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t out = l < hidden_.size() ? hidden_[l] : 1;
        const double* w = &params[offsets_[l]];
        const double* b = w + out * fan_in;
        act[l + 1].assign(out, 0.0);
        for (std::size_t o = 0; o < out; ++o) {
          double s = b[o];
          for (std::size_t i = 0; i < fan_in; ++i) s += w[o * fan_in + i] * act[l][i];
          act[l + 1][o] = (l < hidden_.size() && s < 0.0) ? 0.0 : s;
        }
        fan_in = out;
      }
      const double err = act[layers][0] - y[r];
      loss += 0.5 * err * err;
      delta.assign(1, err);
      for (std::size_t l = layers; l-- > 0;) {
        const std::size_t out = l < hidden_.size() ? hidden_[l] : 1;
        const std::size_t in = l == 0 ? inputs_ : hidden_[l - 1];
        const double* w = &params[offsets_[l]];
        double* gw = &grad[offsets_[l]];
        double* gb = gw + out * in;
        for (std::size_t o = 0; o < out; ++o) {
          gb[o] += delta[o];
          for (std::size_t i = 0; i < in; ++i) gw[o * in + i] += delta[o] * act[l][i];
        }
        if (l == 0) break;
        prev_delta.assign(in, 0.0);
        for (std::size_t i = 0; i < in; ++i) {
          if (act[l][i] <= 0.0) continue;  // ReLU derivative
          double s = 0.0;
          for (std::size_t o = 0; o < out; ++o) s += w[o * in + i] * delta[o];
          prev_delta[i] = s;
        }
        delta.swap(prev_delta);
      }
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (double& g : grad) g *= inv;
    return loss * inv;
  }

 private:
  std::size_t inputs_ = 0;
  std::vector<std::size_t> hidden_;
  std::vector<std::size_t> offsets_;
  std::size_t params_size_ = 0;
  std::vector<double> params_;
};

class MlpRegressor final : public Regressor {
 public:
  MlpRegressor(Mlp net, detail::Standardizer inputs, double y_mean, double y_scale)
      : net_(std::move(net)), inputs_(std::move(inputs)), y_mean_(y_mean), y_scale_(y_scale) {}

  double predict(std::span<const double> row) const override {
    std::vector<double> z(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) z[j] = (row[j] - inputs_.mean[j]) / inputs_.scale[j];
    return y_mean_ + y_scale_ * net_.predict(z);
  }

 private:
  Mlp net_;
  detail::Standardizer inputs_;
  double y_mean_, y_scale_;
};

namespace detail {

inline std::shared_ptr<const MlpRegressor> fit_mlp(const ModelSpec& spec, const FeatureMatrix& m) {
  const std::size_t d = m.cols();
  auto st = Standardizer::fit(m);
  for (auto& s : st.scale)
    if (!(s > 0.0)) s = 1.0;
  double ym = 0.0, ys = 0.0;
  for (double v : m.y) ym += v;
  ym /= static_cast<double>(m.rows);
  for (double v : m.y) ys += (v - ym) * (v - ym);
  ys = std::sqrt(ys / static_cast<double>(m.rows));
  if (!(ys > 0.0)) ys = 1.0;

  std::vector<double> X(m.x.size()), y(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t j = 0; j < d; ++j) X[r * d + j] = (m.x[r * d + j] - st.mean[j]) / st.scale[j];
    y[r] = (m.y[r] - ym) / ys;
  }

  const auto layers = static_cast<std::size_t>(spec.param("layers"));
  const auto width = static_cast<std::size_t>(spec.param("hidden"));
  Mlp net(d, std::vector<std::size_t>(layers, width));
  Rng rng(spec.seed);
  net.initialize(rng);

  const auto epochs = static_cast<std::size_t>(spec.param("epochs"));
  const auto batch = static_cast<std::size_t>(spec.param("batch_size"));
  const double lr = spec.param("learning_rate");
  const double momentum = spec.param("momentum");
  std::vector<std::size_t> order(m.rows);
  std::iota(order.begin(), order.end(), 0u);
  std::vector<double> grad(net.parameter_count()), velocity(net.parameter_count(), 0.0);
  auto params = net.parameters();
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      std::span<const std::size_t> rows(order.data() + start, stop - start);
      epoch_loss += net.loss_and_gradient(params, X, y, rows, grad) * static_cast<double>(rows.size());
      for (std::size_t k = 0; k < params.size(); ++k) {
        velocity[k] = momentum * velocity[k] - lr * grad[k];
        params[k] += velocity[k];
      }
    }
    if (!std::isfinite(epoch_loss))
      throw Error("fit: non-finite loss during MLP training at epoch " + std::to_string(epoch));
  }
  return std::make_shared<MlpRegressor>(std::move(net), std::move(st), ym, ys);
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// Tree ensembles.

class TreeEnsembleRegressor final : public Regressor {
 public:
  TreeEnsembleRegressor(double base, double scale, std::vector<RegressionTree> trees)
      : base_(base), scale_(scale), trees_(std::move(trees)) {}

  double predict(std::span<const double> row) const override {
    double v = 0.0;
    for (const auto& t : trees_) v += t.predict(row);
    return base_ + scale_ * v;
  }
  const std::vector<RegressionTree>& trees() const { return trees_; }

 private:
  double base_, scale_;
  std::vector<RegressionTree> trees_;
};

namespace detail {

inline std::shared_ptr<const TreeEnsembleRegressor> fit_gbt(const ModelSpec& spec, const FeatureMatrix& m) {
  const PresortedDesign design(m.x, m.rows, m.cols());
  double base = 0.0;
  for (double v : m.y) base += v;
  base /= static_cast<double>(m.rows);
  const double lr = spec.param("learning_rate");
  TreeParams tp;
  tp.max_depth = static_cast<int>(spec.param("depth"));
  tp.min_leaf = spec.param("min_leaf");
  std::vector<double> residual(m.rows), weight(m.rows, 1.0);
  for (std::size_t r = 0; r < m.rows; ++r) residual[r] = m.y[r] - base;
  std::vector<RegressionTree> trees;
  const auto count = static_cast<std::size_t>(spec.param("trees"));
  for (std::size_t k = 0; k < count; ++k) {
    trees.push_back(grow_tree(design, residual, weight, tp));
    for (std::size_t r = 0; r < m.rows; ++r) residual[r] -= lr * trees.back().predict(m.row(r));
  }
  return std::make_shared<TreeEnsembleRegressor>(base, lr, std::move(trees));
}

inline std::shared_ptr<const TreeEnsembleRegressor> fit_forest(const ModelSpec& spec, const FeatureMatrix& m) {
  const PresortedDesign design(m.x, m.rows, m.cols());
  TreeParams tp;
  tp.max_depth = static_cast<int>(spec.param("depth"));
  tp.min_leaf = spec.param("min_leaf");
  tp.features_per_split = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(spec.param("feature_fraction") * static_cast<double>(m.cols()))));
  Rng rng(spec.seed);
  const auto count = static_cast<std::size_t>(spec.param("trees"));
  std::vector<RegressionTree> trees;
  std::vector<double> weight(m.rows);
  for (std::size_t k = 0; k < count; ++k) {
    std::fill(weight.begin(), weight.end(), 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) weight[rng.below(m.rows)] += 1.0;
    trees.push_back(grow_tree(design, m.y, weight, tp, &rng));
  }
  return std::make_shared<TreeEnsembleRegressor>(0.0, 1.0 / static_cast<double>(count), std::move(trees));
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------

struct FittedModel {
  ModelSpec spec;
  std::shared_ptr<const Regressor> regressor;  // null for seasonal-naive
  std::size_t period = 0;                      // seasonal-naive only
  double fit_seconds = 0.0;
  std::size_t fit_origin = 0;
};

inline FittedModel fit(const ModelSpec& spec, const FeatureMatrix& matrix) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  FittedModel model;
  model.spec = spec;
  switch (spec.kind) {
    case ModelKind::seasonal_naive: model.period = static_cast<std::size_t>(spec.param("period")); break;
    case ModelKind::pooled_linear:
      detail::check_matrix(matrix);
      model.regressor = detail::fit_linear(matrix, std::nullopt);
      break;
    case ModelKind::pooled_ridge:
      detail::check_matrix(matrix);
      model.regressor = detail::fit_linear(matrix, spec.param("lambda"));
      break;
    case ModelKind::mlp:
      detail::check_matrix(matrix);
      model.regressor = detail::fit_mlp(spec, matrix);
      break;
    case ModelKind::gbt:
      detail::check_matrix(matrix);
      model.regressor = detail::fit_gbt(spec, matrix);
      break;
    case ModelKind::random_forest:
      detail::check_matrix(matrix);
      model.regressor = detail::fit_forest(spec, matrix);
      break;
  }
  model.fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return model;
}

// h point forecasts per series, row-major [series][step].
struct PointForecast {
  std::size_t series = 0;
  std::size_t horizon = 0;
  std::vector<double> values;
  double predict_seconds = 0.0;

  double at(std::size_t i, std::size_t step) const { return values[i * horizon + step]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * horizon, horizon);
  }
};

// Forecasts from the end of every series in `slice`, feeding predictions back into lag features.
inline PointForecast predict(const FittedModel& model, const FeatureBuilder& features, const PanelSlice& slice,
                             std::size_t horizon) {
  const auto start = std::chrono::steady_clock::now();
  PointForecast out;
  out.series = slice.size();
  out.horizon = horizon;
  out.values.resize(slice.size() * horizon);
  std::vector<double> path, row(features.width());
  for (std::size_t i = 0; i < slice.size(); ++i) {
    path.clear();
    if (model.spec.kind == ModelKind::seasonal_naive) {
      if (slice.length(i) < model.period)
        throw Error("predict: series '" + slice.series(i).id + "' has insufficient history for seasonal period " +
                    std::to_string(model.period));
      for (std::size_t s = 0; s < horizon; ++s) {
        const std::size_t t = slice.end(i) + s;
        path.push_back(t - model.period < slice.end(i) ? slice.series(i).values[t - model.period]
                                                       : path[t - model.period - slice.end(i)]);
      }
    } else {
      if (!model.regressor) throw Error("predict: model '" + model.spec.name + "' is not fitted");
      if (slice.length(i) < features.warmup())
        throw Error("predict: series '" + slice.series(i).id + "' has insufficient history (" +
                    std::to_string(slice.length(i)) + " < warm-up " + std::to_string(features.warmup()) + ")");
      for (std::size_t s = 1; s <= horizon; ++s) {
        features.horizon_row(slice, i, s, path, row);
        path.push_back(model.regressor->predict(row));
      }
    }
    std::copy(path.begin(), path.end(), out.values.begin() + static_cast<std::ptrdiff_t>(i * horizon));
  }
  out.predict_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace retrainbench
