#ifndef LOCALNET_LSTSQ_HPP
#define LOCALNET_LSTSQ_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace localnet::detail {

// Dense least squares min ||A x - b||_2 via Householder QR, column-scaled
// for conditioning. A is row-major rows x cols with rows >= cols.
inline std::vector<double> lstsq(std::vector<double> a, std::vector<double> b,
                                 std::size_t rows, std::size_t cols) {
    if (rows < cols) throw std::invalid_argument("lstsq: need rows >= cols");
    if (a.size() != rows * cols || b.size() != rows) throw std::invalid_argument("lstsq: shape mismatch");

    std::vector<double> scale(cols, 1.0);
    for (std::size_t j = 0; j < cols; ++j) {
        double nrm = 0.0;
        for (std::size_t i = 0; i < rows; ++i) nrm += a[i * cols + j] * a[i * cols + j];
        nrm = std::sqrt(nrm);
        if (nrm > 0.0) {
            scale[j] = nrm;
            for (std::size_t i = 0; i < rows; ++i) a[i * cols + j] /= nrm;
        }
    }

    for (std::size_t k = 0; k < cols; ++k) {
        double col_norm = 0.0;
        for (std::size_t i = k; i < rows; ++i) col_norm += a[i * cols + k] * a[i * cols + k];
        col_norm = std::sqrt(col_norm);
        if (col_norm == 0.0) continue;
        const double alpha = a[k * cols + k] >= 0.0 ? -col_norm : col_norm;
        std::vector<double> v(rows - k);
        v[0] = a[k * cols + k] - alpha;
        for (std::size_t i = k + 1; i < rows; ++i) v[i - k] = a[i * cols + k];
        double vnorm2 = 0.0;
        for (double vi : v) vnorm2 += vi * vi;
        if (vnorm2 == 0.0) continue;
        a[k * cols + k] = alpha;
        for (std::size_t i = k + 1; i < rows; ++i) a[i * cols + k] = 0.0;
        for (std::size_t j = k + 1; j < cols; ++j) {
            double proj = 0.0;
            for (std::size_t i = k; i < rows; ++i) proj += v[i - k] * a[i * cols + j];
            proj *= 2.0 / vnorm2;
            for (std::size_t i = k; i < rows; ++i) a[i * cols + j] -= proj * v[i - k];
        }
        double proj = 0.0;
        for (std::size_t i = k; i < rows; ++i) proj += v[i - k] * b[i];
        proj *= 2.0 / vnorm2;
        for (std::size_t i = k; i < rows; ++i) b[i] -= proj * v[i - k];
    }

    std::vector<double> x(cols, 0.0);
    for (std::size_t kk = cols; kk-- > 0;) {
        const double pivot = a[kk * cols + kk];
        if (std::fabs(pivot) < 1e-13) {
            x[kk] = 0.0;  // rank-deficient direction, drop it
            continue;
        }
        double acc = b[kk];
        for (std::size_t j = kk + 1; j < cols; ++j) acc -= a[kk * cols + j] * x[j];
        x[kk] = acc / pivot;
    }
    for (std::size_t j = 0; j < cols; ++j) x[j] /= scale[j];
    return x;
}

}  // namespace localnet::detail

#endif
