#pragma once

// Minimal layer stack for the phase predictor. Activations are column-blocked
// matrices:
//   spatial layers: (channels, batch * height * width), column b*H*W + y*W + x
//   dense layers:   (features, batch)
// Every layer has a pure inference path (`infer`) and a caching training
// path (`forward` + `backward`).

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace irsec::nn {

using Mat = Eigen::MatrixXd;

struct ParamRef {
  Mat* value;
  Mat* grad;
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual Mat infer(const Mat& x) const = 0;
  virtual Mat forward(const Mat& x) = 0;
  virtual Mat backward(const Mat& dy) = 0;
  // Trainable tensors with their gradient buffers.
  virtual void collect_params(std::vector<ParamRef>&) {}
  // Every persistent tensor (weights and running statistics), in a fixed order.
  virtual void collect_state(std::vector<Mat*>&) {}
  virtual std::unique_ptr<Layer> clone() const = 0;
};

// 2-D convolution, stride 1, zero padding "same" (extra row/column of padding
// goes after the data for even kernels).
class Conv2d final : public Layer {
 public:
  Conv2d(int in_channels, int out_channels, int kernel, int height, int width, std::uint64_t seed);
  Mat infer(const Mat& x) const override;
  Mat forward(const Mat& x) override;
  Mat backward(const Mat& dy) override;
  void collect_params(std::vector<ParamRef>& out) override;
  void collect_state(std::vector<Mat*>& out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }

 private:
  Mat im2col(const Mat& x) const;
  Mat col2im(const Mat& col, Eigen::Index batch) const;

  int in_c_, out_c_, k_, h_, w_;
  Mat weight_, bias_, grad_w_, grad_b_;
  Mat col_cache_;
  Eigen::Index batch_cache_ = 0;
};

// Per-row (channel or feature) normalization over all columns.
class BatchNorm final : public Layer {
 public:
  explicit BatchNorm(int features, double momentum = 0.1, double eps = 1e-5);
  Mat infer(const Mat& x) const override;
  Mat forward(const Mat& x) override;
  Mat backward(const Mat& dy) override;
  void collect_params(std::vector<ParamRef>& out) override;
  void collect_state(std::vector<Mat*>& out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<BatchNorm>(*this); }

 private:
  double momentum_, eps_;
  Mat gamma_, beta_, grad_gamma_, grad_beta_;
  Mat running_mean_, running_var_;
  Mat xhat_cache_;
  Eigen::VectorXd inv_std_cache_;
};

class Relu final : public Layer {
 public:
  Mat infer(const Mat& x) const override { return x.cwiseMax(0.0); }
  Mat forward(const Mat& x) override;
  Mat backward(const Mat& dy) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }

 private:
  Mat mask_;
};

class Sigmoid final : public Layer {
 public:
  Mat infer(const Mat& x) const override;
  Mat forward(const Mat& x) override;
  Mat backward(const Mat& dy) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Sigmoid>(*this); }

 private:
  Mat y_cache_;
};

// (C, B*HW) -> (C*HW, B), feature index c*HW + p.
class Flatten final : public Layer {
 public:
  Flatten(int channels, int spatial) : c_(channels), hw_(spatial) {}
  Mat infer(const Mat& x) const override;
  Mat forward(const Mat& x) override { return infer(x); }
  Mat backward(const Mat& dy) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Flatten>(*this); }

 private:
  int c_, hw_;
};

class Linear final : public Layer {
 public:
  Linear(int in_features, int out_features, std::uint64_t seed);
  Mat infer(const Mat& x) const override;
  Mat forward(const Mat& x) override;
  Mat backward(const Mat& dy) override;
  void collect_params(std::vector<ParamRef>& out) override;
  void collect_state(std::vector<Mat*>& out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Linear>(*this); }

 private:
  Mat weight_, bias_, grad_w_, grad_b_;
  Mat x_cache_;
};

// Adaptive moment estimation over a fixed parameter list.
class Adam {
 public:
  Adam(std::vector<ParamRef> params, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(double lr);
  void zero_grad();

 private:
  std::vector<ParamRef> params_;
  std::vector<Mat> m_, v_;
  double beta1_, beta2_, eps_;
  long long t_ = 0;
};

}  // namespace irsec::nn
