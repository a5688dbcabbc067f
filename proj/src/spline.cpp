#include "tcclust/spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "tcclust/error.hpp"

namespace tcclust {

namespace {

constexpr int kDegree = 3;
constexpr int kOrder = kDegree + 1;
constexpr int kMaxInteriorKnots = 40;

} // namespace

BSplineBasis::BSplineBasis(std::vector<double> knots) : knots_(std::move(knots)) {
    n_basis_ = static_cast<int>(knots_.size()) - kOrder;
}

BSplineBasis BSplineBasis::uniform(double a, double b, int n_basis) {
    if (n_basis < kOrder) throw ValidationError("cubic basis needs at least 4 functions");
    if (!(b > a)) throw ValidationError("basis domain must have positive length");
    const int n_interior = n_basis - kOrder;
    std::vector<double> interior;
    for (int i = 1; i <= n_interior; ++i)
        interior.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n_interior + 1));
    return with_interior_knots(a, b, std::move(interior));
}

BSplineBasis BSplineBasis::with_interior_knots(double a, double b, std::vector<double> interior) {
    if (!(b > a)) throw ValidationError("basis domain must have positive length");
    for (std::size_t i = 0; i < interior.size(); ++i) {
        if (!(interior[i] > a && interior[i] < b)) throw ValidationError("interior knot outside (a, b)");
        if (i > 0 && !(interior[i] > interior[i - 1])) throw ValidationError("interior knots must be increasing");
    }
    std::vector<double> knots;
    knots.insert(knots.end(), kOrder, a);
    knots.insert(knots.end(), interior.begin(), interior.end());
    knots.insert(knots.end(), kOrder, b);
    return BSplineBasis(std::move(knots));
}

Eigen::VectorXd BSplineBasis::evaluate(double x) const {
    const double a = lower();
    const double b = upper();
    x = std::clamp(x, a, b);

    // knot span index: largest i with knots_[i] <= x < knots_[i+1]
    const int n_knots = static_cast<int>(knots_.size());
    int span;
    if (x >= b) {
        span = n_knots - kOrder - 2;
        while (span > 0 && knots_[static_cast<std::size_t>(span)] == knots_[static_cast<std::size_t>(span + 1)]) --span;
    } else {
        span = kDegree;
        while (span < n_knots - kOrder - 1 && x >= knots_[static_cast<std::size_t>(span + 1)]) ++span;
    }

    // Cox-de Boor triangular scheme for the kOrder nonzero functions on the span
    double nonzero[kOrder];
    double left[kOrder], right[kOrder];
    nonzero[0] = 1.0;
    for (int j = 1; j <= kDegree; ++j) {
        left[j] = x - knots_[static_cast<std::size_t>(span + 1 - j)];
        right[j] = knots_[static_cast<std::size_t>(span + j)] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double denom = right[r + 1] + left[j - r];
            const double temp = denom != 0.0 ? nonzero[r] / denom : 0.0;
            nonzero[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        nonzero[j] = saved;
    }

    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_basis_);
    for (int j = 0; j <= kDegree; ++j) {
        const int idx = span - kDegree + j;
        if (idx >= 0 && idx < n_basis_) out(idx) = nonzero[j];
    }
    return out;
}

Eigen::MatrixXd BSplineBasis::design(const std::vector<double>& xs) const {
    Eigen::MatrixXd mat(static_cast<Eigen::Index>(xs.size()), n_basis_);
    for (std::size_t i = 0; i < xs.size(); ++i) mat.row(static_cast<Eigen::Index>(i)) = evaluate(xs[i]).transpose();
    return mat;
}

Eigen::MatrixXd BSplineBasis::design(const Eigen::VectorXd& xs) const {
    Eigen::MatrixXd mat(xs.size(), n_basis_);
    for (Eigen::Index i = 0; i < xs.size(); ++i) mat.row(i) = evaluate(xs(i)).transpose();
    return mat;
}

Eigen::MatrixXd BSplineBasis::penalty() const {
    const int q = n_basis_;
    // Greville abscissae: means of kDegree consecutive interior-side knots
    Eigen::VectorXd greville(q);
    for (int i = 0; i < q; ++i) {
        double s = 0.0;
        for (int j = 1; j <= kDegree; ++j) s += knots_[static_cast<std::size_t>(i + j)];
        greville(i) = s / kDegree;
    }

    if (q < 3) return Eigen::MatrixXd::Zero(q, q);
    Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(q - 2, q);
    for (int i = 0; i < q - 2; ++i) {
        const double h0 = greville(i + 1) - greville(i);
        const double h1 = greville(i + 2) - greville(i + 1);
        const double span = greville(i + 2) - greville(i);
        // second divided difference, scaled back to second-derivative units
        diff(i, i) = 2.0 / (h0 * span);
        diff(i, i + 1) = -2.0 / (h0 * h1);
        diff(i, i + 2) = 2.0 / (h1 * span);
    }
    return diff.transpose() * diff;
}

Eigen::VectorXd SplineFit::evaluate(const std::vector<double>& xs) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) out(static_cast<Eigen::Index>(i)) = evaluate(xs[i]);
    return out;
}

SplineFit fit_smoothing_spline(const std::vector<double>& x, const std::vector<double>& y, double lambda) {
    if (x.size() != y.size()) throw ValidationError("x and y lengths differ");
    const std::set<double> distinct(x.begin(), x.end());
    if (distinct.size() < 4) throw ValidationError("smoothing spline needs at least 4 distinct x values");

    std::vector<double> sites(distinct.begin(), distinct.end());
    const double a = sites.front();
    const double b = sites.back();

    // one interior knot per distinct x, quantile-thinned above the cap
    std::vector<double> interior(sites.begin() + 1, sites.end() - 1);
    if (static_cast<int>(interior.size()) > kMaxInteriorKnots) {
        std::vector<double> thinned;
        thinned.reserve(kMaxInteriorKnots);
        const double step = static_cast<double>(interior.size() - 1) / (kMaxInteriorKnots + 1);
        for (int i = 1; i <= kMaxInteriorKnots; ++i) {
            const auto idx = static_cast<std::size_t>(std::llround(i * step));
            if (thinned.empty() || interior[idx] > thinned.back()) thinned.push_back(interior[idx]);
        }
        interior = std::move(thinned);
    }

    BSplineBasis basis = BSplineBasis::with_interior_knots(a, b, std::move(interior));
    const Eigen::MatrixXd design = basis.design(x);
    const Eigen::VectorXd response = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    const Eigen::MatrixXd penalty = basis.penalty();
    const Eigen::MatrixXd gram = design.transpose() * design;
    const Eigen::VectorXd moment = design.transpose() * response;
    const auto n = static_cast<double>(x.size());

    const auto solve_at = [&](double lam, Eigen::VectorXd& coef, double& edf) {
        if (lam <= 0.0) {
            // basis can exceed the data (q = distinct + 2); QR least squares
            // interpolates when the system is consistent
            coef = design.colPivHouseholderQr().solve(response);
            edf = static_cast<double>(design.colPivHouseholderQr().rank());
            return;
        }
        const Eigen::MatrixXd lhs = gram + lam * penalty;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs);
        coef = ldlt.solve(moment);
        edf = ldlt.solve(gram).trace();
    };

    SplineFit fit{basis, Eigen::VectorXd(), lambda, 0.0, 0.0};

    if (lambda >= 0.0) {
        solve_at(lambda, fit.coefficients, fit.edf);
        const double rss = (response - design * fit.coefficients).squaredNorm();
        const double denom = n - fit.edf;
        fit.gcv_score = denom > 1e-8 ? n * rss / (denom * denom) : std::numeric_limits<double>::infinity();
        return fit;
    }

    // GCV over the log grid 1e-4 .. 1e6
    double best_gcv = std::numeric_limits<double>::infinity();
    double best_lambda = 1.0;
    for (int g = 0; g < 41; ++g) {
        const double lam = std::pow(10.0, -4.0 + 10.0 * g / 40.0);
        Eigen::VectorXd coef;
        double edf = 0.0;
        solve_at(lam, coef, edf);
        const double rss = (response - design * coef).squaredNorm();
        const double denom = n - edf;
        if (denom <= 1e-8) continue;
        const double gcv = n * rss / (denom * denom);
        if (gcv < best_gcv) {
            best_gcv = gcv;
            best_lambda = lam;
        }
    }
    fit.penalty_lambda = best_lambda;
    solve_at(best_lambda, fit.coefficients, fit.edf);
    const double rss = (response - design * fit.coefficients).squaredNorm();
    const double denom = n - fit.edf;
    fit.gcv_score = denom > 1e-8 ? n * rss / (denom * denom) : std::numeric_limits<double>::infinity();
    return fit;
}

} // namespace tcclust
