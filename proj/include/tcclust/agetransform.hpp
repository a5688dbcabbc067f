#pragma once

#include "tcclust/spline.hpp"
#include "tcclust/types.hpp"

namespace tcclust {

/// Pseudo-longitudinal representation by age binning: fixed-width bins
/// anchored at the minimum age, per-gene means within each bin, empty bins
/// dropped, grid points at bin midpoints. At least 2 nonempty bins required.
TimeCourseMatrix bin_by_age(const CrossSectionalMatrix& data, double bin_length);

/// Pseudo-longitudinal representation by per-gene spline smoothing: each
/// gene's values are regressed on age with a GCV-tuned penalized spline and
/// predicted at every unique age value (sorted ascending).
TimeCourseMatrix smooth_by_age(const CrossSectionalMatrix& data);

} // namespace tcclust
