#include "eflow/spline.hpp"

#include <algorithm>

#include "eflow/errors.hpp"

namespace eflow {

NaturalSpline::NaturalSpline(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
    const int n = static_cast<int>(knots_.size());
    if (n < 2 || values_.size() != knots_.size())
        throw InvalidArgument("NaturalSpline: need at least two matching knots/values");
    for (int i = 0; i + 1 < n; ++i)
        if (!(knots_[i + 1] > knots_[i]))
            throw InvalidArgument("NaturalSpline: knots must be strictly increasing");

    second_.assign(n, 0.0);
    if (n == 2) return;

    // Thomas algorithm on the interior second derivatives; M_0 = M_{n-1} = 0.
    const int m = n - 2;
    std::vector<double> diag(m), upper(m), rhs(m);
    for (int k = 0; k < m; ++k) {
        const int i = k + 1;
        const double h0 = knots_[i] - knots_[i - 1];
        const double h1 = knots_[i + 1] - knots_[i];
        diag[k] = (h0 + h1) / 3.0;
        upper[k] = h1 / 6.0;
        rhs[k] = (values_[i + 1] - values_[i]) / h1 - (values_[i] - values_[i - 1]) / h0;
    }
    for (int k = 1; k < m; ++k) {
        const double lower = upper[k - 1]; // symmetric
        const double w = lower / diag[k - 1];
        diag[k] -= w * upper[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    second_[m] = rhs[m - 1] / diag[m - 1];
    for (int k = m - 2; k >= 0; --k)
        second_[k + 1] = (rhs[k] - upper[k] * second_[k + 2]) / diag[k];
}

int NaturalSpline::interval(double t) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    int i = static_cast<int>(it - knots_.begin()) - 1;
    return std::clamp(i, 0, static_cast<int>(knots_.size()) - 2);
}

double NaturalSpline::operator()(double t) const {
    const int i = interval(t);
    const double h = knots_[i + 1] - knots_[i];
    const double a = (knots_[i + 1] - t) / h;
    const double b = (t - knots_[i]) / h;
    return a * values_[i] + b * values_[i + 1] +
           ((a * a * a - a) * second_[i] + (b * b * b - b) * second_[i + 1]) * h * h / 6.0;
}

double NaturalSpline::derivative(double t) const {
    const int i = interval(t);
    const double h = knots_[i + 1] - knots_[i];
    const double a = (knots_[i + 1] - t) / h;
    const double b = (t - knots_[i]) / h;
    return (values_[i + 1] - values_[i]) / h +
           (-(3.0 * a * a - 1.0) * second_[i] + (3.0 * b * b - 1.0) * second_[i + 1]) * h / 6.0;
}

} // namespace eflow
