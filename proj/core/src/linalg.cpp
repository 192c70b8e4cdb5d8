#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

#include "detail.hpp"

namespace tnt::detail {

namespace {

Svd svd_core(const Eigen::Ref<const RowMatrix>& a) {
    Eigen::BDCSVD<Eigen::MatrixXd> dec(Eigen::MatrixXd(a), Eigen::ComputeThinU | Eigen::ComputeThinV);
    Svd out;
    out.u = dec.matrixU();
    out.s = dec.singularValues();
    out.vt = dec.matrixV().transpose();
    return out;
}

void fix_signs(Svd& d) {
    for (Index j = 0; j < d.u.cols(); ++j) {
        Index best = 0;
        double mag = -1.0;
        for (Index i = 0; i < d.u.rows(); ++i) {
            if (std::abs(d.u(i, j)) > mag) {
                mag = std::abs(d.u(i, j));
                best = i;
            }
        }
        if (d.u(best, j) < 0.0) {
            d.u.col(j) *= -1.0;
            d.vt.row(j) *= -1.0;
        }
    }
}

}  // namespace

Svd svd(const Eigen::Ref<const RowMatrix>& a) {
    const Index m = a.rows();
    const Index n = a.cols();
    Svd out;
    if (m == 0 || n == 0) {
        out.u = RowMatrix::Zero(m, 0);
        out.s = Vector::Zero(0);
        out.vt = RowMatrix::Zero(0, n);
        return out;
    }
    // Strongly rectangular inputs are reduced to a square triangular factor first.
    if (n > 2 * m) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(a.transpose());
        const Eigen::MatrixXd r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
        const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
        // a = r^T q^T
        Svd small = svd_core(r.transpose());
        out.u = small.u;
        out.s = small.s;
        out.vt = small.vt * q.transpose();
    } else if (m > 2 * n) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
        const Eigen::MatrixXd r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
        const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, n);
        Svd small = svd_core(r);
        out.u = q * small.u;
        out.s = small.s;
        out.vt = small.vt;
    } else {
        out = svd_core(a);
    }
    fix_signs(out);
    return out;
}

Index truncation_rank(const Vector& s, double budget, Index rows, Index cols, Index cap, double floor) {
    Index r = s.size();
    while (r > 0 && s(r - 1) <= floor) --r;
    if (budget > 0.0) {
        const double limit = budget * budget;
        double tail = 0.0;
        while (r > 0) {
            const double next = tail + s(r - 1) * s(r - 1);
            if (next > limit) break;
            tail = next;
            --r;
        }
    } else if (r > 0) {
        const double threshold =
            static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * s(0);
        while (r > 0 && s(r - 1) <= threshold) --r;
    }
    if (cap > 0) r = std::min(r, cap);
    return std::max<Index>(r, 1);
}

void thin_qr(const Eigen::Ref<const RowMatrix>& a, RowMatrix& q, RowMatrix& r) {
    const Index m = a.rows();
    const Index n = a.cols();
    const Index k = std::min(m, n);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr{Eigen::MatrixXd(a)};
    q = qr.householderQ() * Eigen::MatrixXd::Identity(m, k);
    r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
}

RowMatrix pinv(const Eigen::Ref<const RowMatrix>& a, double rcond) {
    const Svd d = svd(a);
    RowMatrix out = RowMatrix::Zero(a.cols(), a.rows());
    if (d.s.size() == 0) return out;
    const double cutoff = rcond * d.s(0);
    for (Index i = 0; i < d.s.size(); ++i) {
        if (d.s(i) > cutoff && d.s(i) > 0.0) out += d.vt.row(i).transpose() * (1.0 / d.s(i)) * d.u.col(i).transpose();
    }
    return out;
}

}  // namespace tnt::detail
