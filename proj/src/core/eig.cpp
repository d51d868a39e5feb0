#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/linalg.hpp"

// Cyclic Jacobi for complex Hermitian matrices. Each rotation zeroes one
// off-diagonal pair exactly; the off-diagonal Frobenius mass is driven below
// kEigOffdiagTarget or the solve is rejected.

namespace qmc {

namespace {

double offdiag_mass(const ComplexMatrix& a) {
    const int n = a.rows();
    double s = 0;
    for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q) s += std::norm(a.at(p, q));
    return std::sqrt(2.0 * s);
}

void jacobi(ComplexMatrix& a, ComplexMatrix* v) {
    const int n = a.rows();
    const double skip = kEigOffdiagTarget / std::max(1, n);
    for (int sweep = 0; sweep < kEigMaxSweeps; ++sweep) {
        if (offdiag_mass(a) < kEigOffdiagTarget) return;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const Cx g = a.at(p, q);
                const double ag = std::abs(g);
                if (ag <= skip) continue;
                const double alpha = a.at(p, p).real();
                const double beta = a.at(q, q).real();
                const double tau = (beta - alpha) / (2.0 * ag);
                const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const Cx u = g / ag;
                const Cx su = s * u, suc = s * std::conj(u);
                for (int r = 0; r < n; ++r) {  // A <- A J
                    const Cx ap = a.at(r, p), aq = a.at(r, q);
                    a.at(r, p) = c * ap - suc * aq;
                    a.at(r, q) = su * ap + c * aq;
                }
                for (int r = 0; r < n; ++r) {  // A <- J† A
                    const Cx ap = a.at(p, r), aq = a.at(q, r);
                    a.at(p, r) = c * ap - su * aq;
                    a.at(q, r) = suc * ap + c * aq;
                }
                a.at(p, q) = 0;
                a.at(q, p) = 0;
                if (v) {
                    for (int r = 0; r < n; ++r) {
                        const Cx vp = v->at(r, p), vq = v->at(r, q);
                        v->at(r, p) = c * vp - suc * vq;
                        v->at(r, q) = su * vp + c * vq;
                    }
                }
            }
        }
    }
    if (offdiag_mass(a) >= kEigOffdiagTarget)
        throw eig_convergence_error("hermitian_eig: no convergence within " +
                                    std::to_string(kEigMaxSweeps) + " sweeps");
}

ComplexMatrix hermitian_part(const ComplexMatrix& h, double tol) {
    if (h.rows() != h.cols()) throw std::invalid_argument("hermitian_eig: non-square matrix");
    if (!h.all_finite()) throw std::invalid_argument("hermitian_eig: non-finite entry");
    if (!h.is_hermitian(tol)) throw std::invalid_argument("hermitian_eig: input not Hermitian");
    const int n = h.rows();
    ComplexMatrix a(n, n);
    for (int r = 0; r < n; ++r) {
        a.at(r, r) = h.at(r, r).real();
        for (int c = r + 1; c < n; ++c) {
            const Cx m = 0.5 * (h.at(r, c) + std::conj(h.at(c, r)));
            a.at(r, c) = m;
            a.at(c, r) = std::conj(m);
        }
    }
    return a;
}

}  // namespace

EigResult hermitian_eig(const ComplexMatrix& h, double tol) {
    ComplexMatrix a = hermitian_part(h, tol);
    const int n = a.rows();
    ComplexMatrix v = ComplexMatrix::identity(n);
    jacobi(a, &v);

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return a.at(i, i).real() > a.at(j, j).real(); });

    EigResult out;
    out.values.resize(static_cast<std::size_t>(n));
    out.vectors = ComplexMatrix(n, n);
    for (int k = 0; k < n; ++k) {
        out.values[static_cast<std::size_t>(k)] = a.at(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]).real();
        for (int r = 0; r < n; ++r) out.vectors.at(r, k) = v.at(r, order[static_cast<std::size_t>(k)]);
    }
    return out;
}

std::vector<double> hermitian_eigvals(const ComplexMatrix& h, double tol) {
    ComplexMatrix a = hermitian_part(h, tol);
    jacobi(a, nullptr);
    std::vector<double> ev(static_cast<std::size_t>(a.rows()));
    for (int i = 0; i < a.rows(); ++i) ev[static_cast<std::size_t>(i)] = a.at(i, i).real();
    std::sort(ev.begin(), ev.end(), std::greater<double>());
    return ev;
}

}  // namespace qmc
