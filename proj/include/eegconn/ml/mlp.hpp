#pragma once

#include "eegconn/ml/hyperparams.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace eegconn::ml {

enum class Activation { logistic, tanh, relu };
enum class Solver { adam, sgd };

struct MlpParams {
  std::vector<int> hidden{50};
  Activation activation = Activation::relu;
  Solver solver = Solver::adam;
  double alpha = 0.1;
  double learning_rate = 1e-3;
  double momentum = 0.9;  // sgd only, Nesterov
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int max_epochs = 2000;
  int batch_size = 32;
  int patience = 50;
  double tolerance = 1e-4;
  double validation_fraction = 0.1;
};

MlpParams mlp_params_from(const Hyperparameters& p);

/// Fully connected layers; weights[l] is fan_in x fan_out.
struct MlpNetwork {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::RowVectorXd> biases;
  Activation activation = Activation::relu;

  /// Glorot-uniform initialization.
  static MlpNetwork initialize(int n_inputs, const std::vector<int>& hidden, int n_outputs,
                               Activation activation, std::uint64_t seed);

  /// Softmax class probabilities, rows x n_outputs.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
};

/// Mean cross-entropy plus alpha / (2 n) * sum of squared weights. When
/// `gradient` is non-null it receives d loss / d parameter with the same
/// shapes as `net`.
double mlp_loss_and_gradient(const MlpNetwork& net, const Eigen::MatrixXd& x,
                             const std::vector<int>& y, double alpha, MlpNetwork* gradient);

class MlpModel {
 public:
  static MlpModel fit(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes,
                      const MlpParams& params, std::uint64_t seed);

  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const { return net_.forward(x); }
  std::vector<int> predict(const Eigen::MatrixXd& x) const;

  const MlpNetwork& network() const { return net_; }
  int epochs_run() const { return epochs_; }

 private:
  MlpNetwork net_;
  int epochs_ = 0;
};

}  // namespace eegconn::ml
