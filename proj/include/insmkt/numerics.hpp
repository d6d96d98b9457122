#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

namespace insmkt::num {

// Composite Simpson quadrature on [a, b] with n_points nodes. An even node
// count is rounded up to the next odd one so the subinterval count stays even.
template <class F>
double simpson(F&& f, double a, double b, int n_points) {
    const int n = n_points < 3 ? 3 : (n_points | 1);
    const int m = n - 1;
    const double h = (b - a) / m;
    double acc = f(a) + f(b);
    for (int i = 1; i < m; ++i) {
        acc += f(a + h * i) * (i % 2 ? 4.0 : 2.0);
    }
    return acc * h / 3.0;
}

// Root of f on [lo, hi] by bisection, given a sign change between the ends.
// Stops once the bracket is narrower than tol.
template <class F>
double bisect(F&& f, double lo, double hi, double tol, int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw std::invalid_argument("bisect: no sign change on the bracket");
    }
    for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (fhi > 0.0)) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

// First point where a monotone predicate flips to true, assuming
// pred(lo) == false and pred(hi) == true.
template <class Pred>
double bisect_first_true(Pred&& pred, double lo, double hi, double tol) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (pred(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

inline int sign(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace insmkt::num
