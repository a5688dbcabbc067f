#pragma once

#include <Eigen/Dense>
#include <vector>

namespace tcclust {

/// Clamped cubic B-spline basis on [a, b].
///
/// The roughness penalty is built from second divided differences of the
/// coefficients taken over the Greville abscissae, so its null space is
/// exactly the affine functions even for unevenly spaced knots. For a
/// uniform knot grid this reduces to the usual second-difference P-spline
/// penalty up to a constant factor.
class BSplineBasis {
public:
    /// Basis with `n_basis` functions (>= 4) and uniformly spaced interior knots.
    static BSplineBasis uniform(double a, double b, int n_basis);

    /// Basis whose interior knots are given explicitly (strictly inside (a, b), sorted).
    static BSplineBasis with_interior_knots(double a, double b, std::vector<double> interior);

    int size() const { return n_basis_; }
    double lower() const { return knots_[3]; }
    double upper() const { return knots_[knots_.size() - 4]; }
    const std::vector<double>& knots() const { return knots_; }

    /// Basis values at x (clamped into [a, b]); length size().
    Eigen::VectorXd evaluate(double x) const;

    /// Design matrix, one row per evaluation point.
    Eigen::MatrixXd design(const std::vector<double>& xs) const;
    Eigen::MatrixXd design(const Eigen::VectorXd& xs) const;

    /// q x q penalty matrix D'D from second divided differences over Greville sites.
    Eigen::MatrixXd penalty() const;

private:
    explicit BSplineBasis(std::vector<double> knots);

    std::vector<double> knots_;  // clamped: 4 copies of each boundary
    int n_basis_;
};

/// One penalized spline fit: minimizes ||y - B(x) theta||^2 + lambda theta' P theta.
struct SplineFit {
    BSplineBasis basis;
    Eigen::VectorXd coefficients;
    double penalty_lambda = 0.0;
    double gcv_score = 0.0;
    double edf = 0.0;  // trace of the hat matrix at the chosen lambda

    double evaluate(double x) const { return basis.evaluate(x).dot(coefficients); }
    Eigen::VectorXd evaluate(const std::vector<double>& xs) const;
};

/// Penalized cubic spline regression with one interior knot per distinct x
/// (capped at 40; quantile-thinned beyond the cap). When `lambda` is
/// negative, the smoothing parameter is chosen by generalized
/// cross-validation over a 41-point log grid on [1e-4, 1e6].
///
/// Requires at least 4 distinct x values.
SplineFit fit_smoothing_spline(const std::vector<double>& x, const std::vector<double>& y, double lambda = -1.0);

} // namespace tcclust
