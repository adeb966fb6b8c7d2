#pragma once

#include <span>
#include <vector>

namespace eflow {

// Natural cubic spline through (t_i, f_i) with strictly increasing knots.
class NaturalSpline {
  public:
    NaturalSpline() = default;
    NaturalSpline(std::vector<double> knots, std::vector<double> values);

    double operator()(double t) const;
    double derivative(double t) const;

    double front() const { return knots_.front(); }
    double back() const { return knots_.back(); }

  private:
    int interval(double t) const;

    std::vector<double> knots_;
    std::vector<double> values_;
    std::vector<double> second_; // second derivatives at the knots
};

} // namespace eflow
