#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "landing_safety/lidar.hpp"

namespace landing_safety {

// FIFO of recently confirmed deceleration capability samples. The worst (the
// minimum) is what the envelope may rely on. Callers must serialize access;
// the harness runs producer and consumer on one thread.
class SlidingWindow {
public:
  explicit SlidingWindow(std::size_t capacity) : capacity_(capacity)
  {
    if (capacity == 0) {
      throw std::invalid_argument("window capacity must be positive");
    }
  }

  void insert(double sample)
  {
    if (!std::isfinite(sample)) {
      throw std::invalid_argument("capability sample must be finite");
    }
    samples_.push_back(sample);
    while (samples_.size() > capacity_) {
      samples_.pop_front();
    }
  }

  // Empty means no confirmation yet; callers fall back to the static budget.
  std::optional<double> worst() const
  {
    if (samples_.empty()) {
      return std::nullopt;
    }
    return *std::min_element(samples_.begin(), samples_.end());
  }

  void resize(std::size_t capacity)
  {
    if (capacity == 0) {
      throw std::invalid_argument("window capacity must be positive");
    }
    capacity_ = capacity;
    while (samples_.size() > capacity_) {
      samples_.pop_front();
    }
  }

  std::size_t size() const { return samples_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return samples_.empty(); }

private:
  std::size_t capacity_;
  std::deque<double> samples_;
};

// Distance covered from commanding a stop at descent speed v: the response
// delay budget at constant speed plus the braking arc at deceleration a.
inline double stopping_distance(double v, double a_max, double latency_s)
{
  if (v < 0.0 || a_max <= 0.0 || latency_s < 0.0) {
    throw std::invalid_argument("need v >= 0, a_max > 0, latency >= 0");
  }
  return v * latency_s + v * v / (2.0 * a_max);
}

// Largest descent speed whose stop fits inside distance d: the positive root
// of stopping_distance(v) = d.
inline double v_safe_max(double a_max, double latency_s, double d)
{
  if (a_max <= 0.0 || latency_s < 0.0 || d < 0.0) {
    throw std::invalid_argument("need a_max > 0, latency >= 0, d >= 0");
  }
  const double al = a_max * latency_s;
  return std::sqrt(al * al + 2.0 * a_max * d) - al;
}

struct EnvelopeParams {
  double a_max = 1.34;       // deceleration the check may assume, m/s^2
  double latency_s = 0.15;   // worst-case reaction latency budget
  double d_stop_max = 25.0;  // commanded-speed cap expressed as a stop distance
  double d_det = 28.6479;    // range inside which qualifying obstacles are seen
};

inline void validate(const EnvelopeParams & params)
{
  if (params.a_max <= 0.0 || params.latency_s < 0.0) {
    throw std::invalid_argument("need a_max > 0 and latency >= 0");
  }
  if (params.d_stop_max <= 0.0 || params.d_det <= 0.0) {
    throw std::invalid_argument("stop cap and detection range must be positive");
  }
  if (params.d_stop_max > params.d_det) {
    throw std::invalid_argument(
      "stop-distance cap exceeds the guaranteed detection range; the vehicle could "
      "outrun what it can see");
  }
}

enum class EnvelopeState { Inside, Violation };

// An unknown obstacle distance is treated as an obstacle just past the
// guaranteed detection range: the stop must always fit inside what has been
// verified clear.
inline EnvelopeState envelope_check(
  double descent_speed, std::optional<double> d_obstacle, const EnvelopeParams & params)
{
  validate(params);
  const double v = std::max(0.0, descent_speed);
  const double budget =
    d_obstacle ? std::min(*d_obstacle, params.d_det) : params.d_det;
  return stopping_distance(v, params.a_max, params.latency_s) <= budget
           ? EnvelopeState::Inside
           : EnvelopeState::Violation;
}

// Fig.-style curves: commanded-speed bound against obstacle distance for the
// static worst-case and dynamically confirmed deceleration, each with zero and
// with the full latency budget.
inline void write_envelope_curves_csv(
  double a_wc, double a_dc, double latency_s, double d_det, std::ostream & os,
  double d_max_m = 60.0, double step_m = 0.25)
{
  os << "d_obstacle_m,v_wc_l0,v_wc_lmax,v_dc_l0,v_dc_lmax\n";
  for (double d = 0.0; d <= d_max_m + 1e-9; d += step_m) {
    const double cap = std::min(d, d_det);
    os << detail::format_double(d) << ',' << detail::format_double(v_safe_max(a_wc, 0.0, cap))
       << ',' << detail::format_double(v_safe_max(a_wc, latency_s, cap)) << ','
       << detail::format_double(v_safe_max(a_dc, 0.0, cap)) << ','
       << detail::format_double(v_safe_max(a_dc, latency_s, cap)) << "\n";
  }
}

}  // namespace landing_safety
