#include "eegconn/ml/mlp.hpp"

#include "eegconn/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace eegconn::ml {

MlpParams mlp_params_from(const Hyperparameters& p) {
  validate_hyperparameters(Family::mlp, p);
  MlpParams out;
  const int layers = static_cast<int>(get_number(p, "hidden_layers"));
  const int units = static_cast<int>(get_number(p, "hidden_units"));
  out.hidden.assign(layers, units);
  const auto& act = get_string(p, "activation");
  out.activation = act == "relu" ? Activation::relu
                   : act == "tanh" ? Activation::tanh
                                   : Activation::logistic;
  out.solver = get_string(p, "solver") == "sgd" ? Solver::sgd : Solver::adam;
  out.alpha = get_number(p, "alpha");
  if (p.count("learning_rate")) out.learning_rate = get_number(p, "learning_rate");
  if (p.count("max_epochs")) out.max_epochs = static_cast<int>(get_number(p, "max_epochs"));
  return out;
}

namespace {

void activate(Eigen::MatrixXd& z, Activation a) {
  switch (a) {
    case Activation::relu: z = z.cwiseMax(0.0); break;
    case Activation::tanh: z = z.array().tanh().matrix(); break;
    case Activation::logistic: z = (1.0 / (1.0 + (-z.array()).exp())).matrix(); break;
  }
}

// Derivative expressed through the activation output.
void multiply_derivative(Eigen::MatrixXd& delta, const Eigen::MatrixXd& out, Activation a) {
  switch (a) {
    case Activation::relu: delta = (out.array() > 0.0).select(delta, 0.0); break;
    case Activation::tanh: delta.array() *= 1.0 - out.array().square(); break;
    case Activation::logistic: delta.array() *= out.array() * (1.0 - out.array()); break;
  }
}

void softmax_rows(Eigen::MatrixXd& z) {
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double m = z.row(r).maxCoeff();
    z.row(r) = (z.row(r).array() - m).exp().matrix();
    z.row(r) /= z.row(r).sum();
  }
}

}  // namespace

MlpNetwork MlpNetwork::initialize(int n_inputs, const std::vector<int>& hidden, int n_outputs,
                                  Activation activation, std::uint64_t seed) {
  MlpNetwork net;
  net.activation = activation;
  Rng rng(seed);
  std::vector<int> sizes{n_inputs};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(n_outputs);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double factor = activation == Activation::logistic ? 2.0 : 6.0;
    const double bound = std::sqrt(factor / (sizes[l] + sizes[l + 1]));
    Eigen::MatrixXd w(sizes[l], sizes[l + 1]);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = bound * (2.0 * rng.uniform() - 1.0);
    Eigen::RowVectorXd b(sizes[l + 1]);
    for (Eigen::Index j = 0; j < b.size(); ++j) b(j) = bound * (2.0 * rng.uniform() - 1.0);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  return net;
}

Eigen::MatrixXd MlpNetwork::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Eigen::MatrixXd z = a * weights[l];
    z.rowwise() += biases[l];
    if (l + 1 < weights.size()) activate(z, activation);
    a = std::move(z);
  }
  softmax_rows(a);
  return a;
}

double mlp_loss_and_gradient(const MlpNetwork& net, const Eigen::MatrixXd& x,
                             const std::vector<int>& y, double alpha, MlpNetwork* gradient) {
  const std::size_t n_layers = net.weights.size();
  const double n = static_cast<double>(x.rows());
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(n_layers + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z = acts.back() * net.weights[l];
    z.rowwise() += net.biases[l];
    if (l + 1 < n_layers) activate(z, net.activation);
    acts.push_back(std::move(z));
  }
  Eigen::MatrixXd& probs = acts.back();
  softmax_rows(probs);

  double loss = 0.0;
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    loss -= std::log(std::max(probs(r, y[r]), 1e-300));
  }
  loss /= n;
  double sq = 0.0;
  for (const auto& w : net.weights) sq += w.squaredNorm();
  loss += alpha / (2.0 * n) * sq;
  if (!gradient) return loss;

  gradient->activation = net.activation;
  gradient->weights.resize(n_layers);
  gradient->biases.resize(n_layers);
  Eigen::MatrixXd delta = probs;
  for (Eigen::Index r = 0; r < delta.rows(); ++r) delta(r, y[r]) -= 1.0;
  delta /= n;
  for (std::size_t l = n_layers; l-- > 0;) {
    gradient->weights[l] = acts[l].transpose() * delta + (alpha / n) * net.weights[l];
    gradient->biases[l] = delta.colwise().sum();
    if (l > 0) {
      Eigen::MatrixXd next = delta * net.weights[l].transpose();
      multiply_derivative(next, acts[l], net.activation);
      delta = std::move(next);
    }
  }
  return loss;
}

namespace {

struct Optimizer {
  const MlpParams& p;
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::RowVectorXd> mb, vb;
  long step = 0;

  Optimizer(const MlpParams& params, const MlpNetwork& net) : p(params) {
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      mw.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
      vw.push_back(mw.back());
      mb.push_back(Eigen::RowVectorXd::Zero(net.biases[l].size()));
      vb.push_back(mb.back());
    }
  }

  template <typename P, typename G>
  void update(P& param, const G& grad, P& m, P& v) {
    if (p.solver == Solver::adam) {
      m = p.beta1 * m + (1.0 - p.beta1) * grad;
      v = p.beta2 * v + (1.0 - p.beta2) * grad.cwiseProduct(grad);
      const double lr = p.learning_rate * std::sqrt(1.0 - std::pow(p.beta2, step)) /
                        (1.0 - std::pow(p.beta1, step));
      param.array() -= lr * m.array() / (v.array().sqrt() + p.epsilon);
    } else {
      // Nesterov momentum in the velocity form.
      m = p.momentum * m - p.learning_rate * grad;
      param += p.momentum * m - p.learning_rate * grad;
    }
  }

  void apply(MlpNetwork& net, const MlpNetwork& g) {
    ++step;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      update(net.weights[l], g.weights[l], mw[l], vw[l]);
      update(net.biases[l], g.biases[l], mb[l], vb[l]);
    }
  }
};

}  // namespace

MlpModel MlpModel::fit(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes,
                       const MlpParams& params, std::uint64_t seed) {
  const auto n = static_cast<int>(x.rows());
  if (n != static_cast<int>(y.size())) throw std::invalid_argument("mlp: row mismatch");
  if (params.hidden.empty() || params.max_epochs < 1) throw std::invalid_argument("mlp: invalid parameters");

  Rng rng(mix_seed(seed, 0x6d6c70));
  // Stratified validation holdout for early stopping.
  std::vector<int> train_rows, valid_rows;
  {
    std::vector<std::vector<int>> by_class(n_classes);
    for (int i = 0; i < n; ++i) by_class[y[i]].push_back(i);
    for (auto& members : by_class) {
      shuffle(members.begin(), members.end(), rng);
      const auto hold = static_cast<std::size_t>(
          std::floor(params.validation_fraction * static_cast<double>(members.size())));
      for (std::size_t k = 0; k < members.size(); ++k) {
        (k < hold ? valid_rows : train_rows).push_back(members[k]);
      }
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(valid_rows.begin(), valid_rows.end());
  }
  const bool use_validation = !valid_rows.empty();
  const Eigen::MatrixXd x_valid = x(valid_rows, Eigen::all);
  std::vector<int> y_valid;
  for (const int r : valid_rows) y_valid.push_back(y[r]);

  MlpModel model;
  model.net_ = MlpNetwork::initialize(static_cast<int>(x.cols()), params.hidden, n_classes,
                                      params.activation, rng.next_u64());
  Optimizer opt(params, model.net_);
  const int batch = std::max(1, std::min<int>(params.batch_size, static_cast<int>(train_rows.size())));

  MlpNetwork best = model.net_;
  double best_loss = std::numeric_limits<double>::infinity();
  int stall = 0;
  std::vector<int> order = train_rows;
  MlpNetwork grad;
  std::vector<int> yb;
  for (int epoch = 0; epoch < params.max_epochs; ++epoch) {
    shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      std::vector<int> rows(order.begin() + start, order.begin() + stop);
      yb.clear();
      for (const int r : rows) yb.push_back(y[r]);
      const double l = mlp_loss_and_gradient(model.net_, x(rows, Eigen::all), yb, params.alpha, &grad);
      epoch_loss += l * static_cast<double>(rows.size());
      opt.apply(model.net_, grad);
    }
    epoch_loss /= static_cast<double>(order.size());
    const double monitored =
        use_validation ? mlp_loss_and_gradient(model.net_, x_valid, y_valid, params.alpha, nullptr)
                       : epoch_loss;
    model.epochs_ = epoch + 1;
    if (!std::isfinite(monitored)) break;
    if (monitored < best_loss - params.tolerance) {
      best_loss = monitored;
      best = model.net_;
      stall = 0;
    } else if (++stall >= params.patience) {
      break;
    }
  }
  if (std::isfinite(best_loss)) model.net_ = std::move(best);
  return model;
}

std::vector<int> MlpModel::predict(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd p = predict_proba(x);
  std::vector<int> out(p.rows());
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    Eigen::Index best = 0;
    p.row(r).maxCoeff(&best);
    out[r] = static_cast<int>(best);
  }
  return out;
}

}  // namespace eegconn::ml
