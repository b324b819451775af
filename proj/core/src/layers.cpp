#include "layers.hpp"

#include <algorithm>
#include <cmath>

#include "irsec/random.hpp"

namespace irsec::nn {

namespace {

Mat uniform_init(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-bound, bound);
  return m;
}

// Saturated sigmoid outputs are kept off the endpoints so the result stays
// strictly inside (0, 1).
constexpr double kSigmoidEdge = 1e-15;

double sigmoid(double x) {
  const double y = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  return std::clamp(y, kSigmoidEdge, 1.0 - kSigmoidEdge);
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int height, int width, std::uint64_t seed)
    : in_c_(in_channels), out_c_(out_channels), k_(kernel), h_(height), w_(width) {
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_c_ * k_ * k_));
  weight_ = uniform_init(out_c_, in_c_ * k_ * k_, bound, rng);
  bias_ = uniform_init(out_c_, 1, bound, rng);
  grad_w_ = Mat::Zero(weight_.rows(), weight_.cols());
  grad_b_ = Mat::Zero(bias_.rows(), 1);
}

Mat Conv2d::im2col(const Mat& x) const {
  const Eigen::Index hw = static_cast<Eigen::Index>(h_) * w_;
  const Eigen::Index batch = x.cols() / hw;
  const int pad = (k_ - 1) / 2;  // before; the remainder goes after
  Mat col = Mat::Zero(static_cast<Eigen::Index>(in_c_) * k_ * k_, batch * hw);
  for (int c = 0; c < in_c_; ++c)
    for (int dy = 0; dy < k_; ++dy)
      for (int dx = 0; dx < k_; ++dx) {
        const Eigen::Index row = (static_cast<Eigen::Index>(c) * k_ + dy) * k_ + dx;
        for (Eigen::Index b = 0; b < batch; ++b)
          for (int y = 0; y < h_; ++y) {
            const int sy = y + dy - pad;
            if (sy < 0 || sy >= h_) continue;
            for (int xx = 0; xx < w_; ++xx) {
              const int sx = xx + dx - pad;
              if (sx < 0 || sx >= w_) continue;
              col(row, b * hw + y * w_ + xx) = x(c, b * hw + sy * w_ + sx);
            }
          }
      }
  return col;
}

Mat Conv2d::col2im(const Mat& col, Eigen::Index batch) const {
  const Eigen::Index hw = static_cast<Eigen::Index>(h_) * w_;
  const int pad = (k_ - 1) / 2;
  Mat x = Mat::Zero(in_c_, batch * hw);
  for (int c = 0; c < in_c_; ++c)
    for (int dy = 0; dy < k_; ++dy)
      for (int dx = 0; dx < k_; ++dx) {
        const Eigen::Index row = (static_cast<Eigen::Index>(c) * k_ + dy) * k_ + dx;
        for (Eigen::Index b = 0; b < batch; ++b)
          for (int y = 0; y < h_; ++y) {
            const int sy = y + dy - pad;
            if (sy < 0 || sy >= h_) continue;
            for (int xx = 0; xx < w_; ++xx) {
              const int sx = xx + dx - pad;
              if (sx < 0 || sx >= w_) continue;
              x(c, b * hw + sy * w_ + sx) += col(row, b * hw + y * w_ + xx);
            }
          }
      }
  return x;
}

Mat Conv2d::infer(const Mat& x) const {
  Mat y = weight_ * im2col(x);
  y.colwise() += bias_.col(0);
  return y;
}

Mat Conv2d::forward(const Mat& x) {
  col_cache_ = im2col(x);
  batch_cache_ = x.cols() / (static_cast<Eigen::Index>(h_) * w_);
  Mat y = weight_ * col_cache_;
  y.colwise() += bias_.col(0);
  return y;
}

Mat Conv2d::backward(const Mat& dy) {
  grad_w_ += dy * col_cache_.transpose();
  grad_b_ += dy.rowwise().sum();
  return col2im(weight_.transpose() * dy, batch_cache_);
}

void Conv2d::collect_params(std::vector<ParamRef>& out) {
  out.push_back({&weight_, &grad_w_});
  out.push_back({&bias_, &grad_b_});
}

void Conv2d::collect_state(std::vector<Mat*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// ---------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(int features, double momentum, double eps)
    : momentum_(momentum),
      eps_(eps),
      gamma_(Mat::Ones(features, 1)),
      beta_(Mat::Zero(features, 1)),
      grad_gamma_(Mat::Zero(features, 1)),
      grad_beta_(Mat::Zero(features, 1)),
      running_mean_(Mat::Zero(features, 1)),
      running_var_(Mat::Ones(features, 1)) {}

Mat BatchNorm::infer(const Mat& x) const {
  const Eigen::VectorXd scale =
      gamma_.col(0).array() / (running_var_.col(0).array() + eps_).sqrt();
  Mat y = (x.colwise() - running_mean_.col(0));
  y = scale.asDiagonal() * y;
  y.colwise() += beta_.col(0);
  return y;
}

Mat BatchNorm::forward(const Mat& x) {
  const double n = static_cast<double>(x.cols());
  const Eigen::VectorXd mean = x.rowwise().mean();
  const Mat centered = x.colwise() - mean;
  const Eigen::VectorXd var = centered.array().square().rowwise().sum() / n;
  inv_std_cache_ = (var.array() + eps_).rsqrt();
  xhat_cache_ = inv_std_cache_.asDiagonal() * centered;

  const double unbias = n > 1.0 ? n / (n - 1.0) : 1.0;
  running_mean_.col(0) = (1.0 - momentum_) * running_mean_.col(0) + momentum_ * mean;
  running_var_.col(0) = (1.0 - momentum_) * running_var_.col(0) + momentum_ * unbias * var;

  Mat y = gamma_.col(0).asDiagonal() * xhat_cache_;
  y.colwise() += beta_.col(0);
  return y;
}

Mat BatchNorm::backward(const Mat& dy) {
  const double n = static_cast<double>(dy.cols());
  const Eigen::VectorXd sum_dy = dy.rowwise().sum();
  const Eigen::VectorXd sum_dy_xhat = dy.cwiseProduct(xhat_cache_).rowwise().sum();
  grad_gamma_.col(0) += sum_dy_xhat;
  grad_beta_.col(0) += sum_dy;
  // dx = gamma * inv_std / n * (n dy - sum(dy) - xhat sum(dy xhat))
  Mat dx = n * dy;
  dx.colwise() -= sum_dy;
  dx -= sum_dy_xhat.asDiagonal() * xhat_cache_;
  const Eigen::VectorXd scale = gamma_.col(0).cwiseProduct(inv_std_cache_) / n;
  return scale.asDiagonal() * dx;
}

void BatchNorm::collect_params(std::vector<ParamRef>& out) {
  out.push_back({&gamma_, &grad_gamma_});
  out.push_back({&beta_, &grad_beta_});
}

void BatchNorm::collect_state(std::vector<Mat*>& out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
  out.push_back(&running_mean_);
  out.push_back(&running_var_);
}

// ---------------------------------------------------------------- activations

Mat Relu::forward(const Mat& x) {
  mask_ = (x.array() > 0.0).cast<double>();
  return x.cwiseProduct(mask_);
}

Mat Relu::backward(const Mat& dy) { return dy.cwiseProduct(mask_); }

Mat Sigmoid::infer(const Mat& x) const { return x.unaryExpr([](double v) { return sigmoid(v); }); }

Mat Sigmoid::forward(const Mat& x) {
  y_cache_ = infer(x);
  return y_cache_;
}

Mat Sigmoid::backward(const Mat& dy) {
  return dy.array() * y_cache_.array() * (1.0 - y_cache_.array());
}

// ---------------------------------------------------------------- Flatten

Mat Flatten::infer(const Mat& x) const {
  const Eigen::Index batch = x.cols() / hw_;
  Mat y(static_cast<Eigen::Index>(c_) * hw_, batch);
  for (Eigen::Index b = 0; b < batch; ++b)
    for (int c = 0; c < c_; ++c) y.block(c * hw_, b, hw_, 1) = x.block(c, b * hw_, 1, hw_).transpose();
  return y;
}

Mat Flatten::backward(const Mat& dy) {
  const Eigen::Index batch = dy.cols();
  Mat dx(c_, batch * hw_);
  for (Eigen::Index b = 0; b < batch; ++b)
    for (int c = 0; c < c_; ++c) dx.block(c, b * hw_, 1, hw_) = dy.block(c * hw_, b, hw_, 1).transpose();
  return dx;
}

// ---------------------------------------------------------------- Linear

Linear::Linear(int in_features, int out_features, std::uint64_t seed) {
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_features));
  weight_ = uniform_init(out_features, in_features, bound, rng);
  bias_ = uniform_init(out_features, 1, bound, rng);
  grad_w_ = Mat::Zero(out_features, in_features);
  grad_b_ = Mat::Zero(out_features, 1);
}

Mat Linear::infer(const Mat& x) const {
  Mat y = weight_ * x;
  y.colwise() += bias_.col(0);
  return y;
}

Mat Linear::forward(const Mat& x) {
  x_cache_ = x;
  return infer(x);
}

Mat Linear::backward(const Mat& dy) {
  grad_w_ += dy * x_cache_.transpose();
  grad_b_ += dy.rowwise().sum();
  return weight_.transpose() * dy;
}

void Linear::collect_params(std::vector<ParamRef>& out) {
  out.push_back({&weight_, &grad_w_});
  out.push_back({&bias_, &grad_b_});
}

void Linear::collect_state(std::vector<Mat*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// ---------------------------------------------------------------- Adam

Adam::Adam(std::vector<ParamRef> params, double beta1, double beta2, double eps)
    : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params_) {
    m_.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
    v_.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.grad->setZero();
}

void Adam::step(double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Mat& g = *params_[i].grad;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseAbs2();
    *params_[i].value -=
        (lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_)).matrix();
  }
}

}  // namespace irsec::nn
