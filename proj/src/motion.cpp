#include "lttrack/motion.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace lttrack::motion {

Prediction box_from_state(double cx, double cy, double area, double aspect) {
  Prediction p;
  double w = 1.0;
  double h = 1.0;
  if (area > 0.0 && aspect > 0.0 && std::isfinite(area) && std::isfinite(aspect)) {
    w = std::sqrt(area * aspect);
    h = area / w;
  } else {
    p.clamped = true;
  }
  if (w < 1.0) {
    w = 1.0;
    p.clamped = true;
  }
  if (h < 1.0) {
    h = 1.0;
    p.clamped = true;
  }
  p.box = BBox::from_center(cx, cy, w, h);
  return p;
}

// ---------------------------------------------------------------------------

ConstantVelocityModel::ConstantVelocityModel(const BBox& initial)
    : estimate_(initial), last_observed_(initial) {}

Prediction ConstantVelocityModel::predict() const {
  return {BBox{estimate_.x + vx_, estimate_.y + vy_, estimate_.w, estimate_.h}, false};
}

void ConstantVelocityModel::advance() {
  estimate_.x += vx_;
  estimate_.y += vy_;
  ++frames_since_observation_;
}

void ConstantVelocityModel::correct(const BBox& observed) {
  if (frames_since_observation_ > 0) {
    const double dt = frames_since_observation_;
    vx_ = (observed.cx() - last_observed_.cx()) / dt;
    vy_ = (observed.cy() - last_observed_.cy()) / dt;
  }
  estimate_ = observed;
  last_observed_ = observed;
  frames_since_observation_ = 0;
}

// ---------------------------------------------------------------------------

namespace {

using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat47 = Eigen::Matrix<double, 4, 7>;
using Vec4 = Eigen::Matrix<double, 4, 1>;

Vec4 measurement_of(const BBox& b) {
  return Vec4(b.cx(), b.cy(), b.w * b.h, b.w / b.h);
}

KalmanCvModel::Covariance transition() {
  KalmanCvModel::Covariance f = KalmanCvModel::Covariance::Identity();
  f(0, 4) = 1.0;
  f(1, 5) = 1.0;
  f(2, 6) = 1.0;
  return f;
}

Mat47 observation() {
  Mat47 h = Mat47::Zero();
  h.leftCols<4>().setIdentity();
  return h;
}

}  // namespace

KalmanCvModel::KalmanCvModel(const BBox& initial, KalmanNoise noise) : noise_(noise) {
  x_.setZero();
  x_.head<4>() = measurement_of(initial);
  p_.setZero();
  p_.diagonal() << 10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4;
}

KalmanCvModel::State KalmanCvModel::propagate(State x) {
  // Area must not be driven through zero.
  if (x(2) + x(6) <= 0.0) x(6) = 0.0;
  x(0) += x(4);
  x(1) += x(5);
  x(2) += x(6);
  return x;
}

Prediction KalmanCvModel::predict() const {
  const State next = propagate(x_);
  return box_from_state(next(0), next(1), next(2), next(3));
}

void KalmanCvModel::advance() {
  if (x_(2) + x_(6) <= 0.0) x_(6) = 0.0;
  static const Covariance f = transition();
  x_ = f * x_;
  Covariance q = Covariance::Zero();
  q.diagonal() << 1.0, 1.0, 1.0, 1.0, 1e-2, 1e-2, 1e-4;
  p_ = f * p_ * f.transpose() + noise_.process * q;
}

void KalmanCvModel::correct(const BBox& observed) {
  static const Mat47 h = observation();
  Mat4 r = Mat4::Zero();
  r.diagonal() << 1.0, 1.0, 10.0, 10.0;
  r *= noise_.measurement;

  const Vec4 innovation = measurement_of(observed) - h * x_;
  const Mat4 s = h * p_ * h.transpose() + r;
  // Pseudo-inverse keeps the update defined when both covariances vanish.
  const Mat4 s_inv = s.completeOrthogonalDecomposition().pseudoInverse();
  const Eigen::Matrix<double, 7, 4> k = p_ * h.transpose() * s_inv;
  x_ += k * innovation;
  p_ = (Covariance::Identity() - k * h) * p_;
  p_ = 0.5 * (p_ + p_.transpose());
}

// ---------------------------------------------------------------------------

Predictor Predictor::make(PredictorKind kind, const BBox& initial, KalmanNoise noise) {
  switch (kind) {
    case PredictorKind::Static: return Predictor(StaticModel(initial));
    case PredictorKind::ConstantVelocity: return Predictor(ConstantVelocityModel(initial));
    case PredictorKind::KalmanCV: return Predictor(KalmanCvModel(initial, noise));
  }
  throw std::invalid_argument("unknown predictor kind");
}

PredictorKind Predictor::kind() const {
  switch (model_.index()) {
    case 0: return PredictorKind::Static;
    case 1: return PredictorKind::ConstantVelocity;
    default: return PredictorKind::KalmanCV;
  }
}

Prediction Predictor::predict() const {
  return std::visit([](const auto& m) { return m.predict(); }, model_);
}

void Predictor::advance() {
  std::visit([](auto& m) { m.advance(); }, model_);
}

void Predictor::correct(const BBox& observed) {
  std::visit([&](auto& m) { m.correct(observed); }, model_);
}

}  // namespace lttrack::motion
