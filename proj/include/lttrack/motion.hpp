#pragma once

#include <variant>

#include <Eigen/Core>

#include "lttrack/config.hpp"
#include "lttrack/types.hpp"

namespace lttrack::motion {

struct Prediction {
  BBox box;
  bool clamped = false;  // a side collapsed below one pixel and was clamped
};

/// Repeats the last observed box.
class StaticModel {
 public:
  explicit StaticModel(const BBox& initial) : last_(initial) {}

  Prediction predict() const { return {last_, false}; }
  void advance() {}
  void correct(const BBox& observed) { last_ = observed; }

 private:
  BBox last_;
};

/// Extrapolates the center by the velocity between the last two
/// observations; size is held.
class ConstantVelocityModel {
 public:
  explicit ConstantVelocityModel(const BBox& initial);

  Prediction predict() const;
  void advance();
  void correct(const BBox& observed);

  double vx() const { return vx_; }
  double vy() const { return vy_; }

 private:
  BBox estimate_;
  BBox last_observed_;
  double vx_ = 0.0;
  double vy_ = 0.0;
  int frames_since_observation_ = 0;
};

/// SORT-style Kalman filter over (cx, cy, area, aspect) with constant
/// velocity on center and area.
class KalmanCvModel {
 public:
  using State = Eigen::Matrix<double, 7, 1>;
  using Covariance = Eigen::Matrix<double, 7, 7>;

  KalmanCvModel(const BBox& initial, KalmanNoise noise);

  Prediction predict() const;
  void advance();
  void correct(const BBox& observed);

  const State& state() const { return x_; }
  const Covariance& covariance() const { return p_; }

 private:
  static State propagate(State x);

  State x_;
  Covariance p_;
  KalmanNoise noise_;
};

/// Per-tracklet box predictor. `predict()` is the box expected in the next
/// frame; `advance()` commits one frame of motion and `correct()` folds in
/// an observation for the frame just advanced to.
class Predictor {
 public:
  static Predictor make(PredictorKind kind, const BBox& initial, KalmanNoise noise = {});

  PredictorKind kind() const;
  Prediction predict() const;
  void advance();
  void correct(const BBox& observed);

 private:
  using Model = std::variant<StaticModel, ConstantVelocityModel, KalmanCvModel>;
  explicit Predictor(Model model) : model_(std::move(model)) {}

  Model model_;
};

/// Converts (cx, cy, area, aspect) to a box, clamping collapsed sides to one
/// pixel.
Prediction box_from_state(double cx, double cy, double area, double aspect);

}  // namespace lttrack::motion
