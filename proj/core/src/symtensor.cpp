#include "trt/symtensor.hpp"

#include <array>
#include <cmath>
#include <mutex>

namespace trt {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

} // namespace

MultiIndex MultiIndex::from_rank(int m, int r) {
    // d = m - a is the smallest integer with d(d+1)/2 + d >= r.
    int d = 0;
    while (d * (d + 1) / 2 + d < r) ++d;
    const int base = d * (d + 1) / 2;
    const int b = d - (r - base);
    return MultiIndex{m - d, b, d - b};
}

double MultiIndex::multiplicity() const {
    return factorial(order()) / (factorial(a) * factorial(b) * factorial(c));
}

SymIndexTable::SymIndexTable(int m) : m_(m) {
    const int n = dim_sym(m);
    indices_.reserve(n);
    mult_.resize(n);
    sqrt_mult_.resize(n);
    int r = 0;
    for (int a = m; a >= 0; --a) {
        for (int b = m - a; b >= 0; --b) {
            const MultiIndex idx{a, b, m - a - b};
            indices_.push_back(idx);
            mult_[r] = idx.multiplicity();
            sqrt_mult_[r] = std::sqrt(mult_[r]);
            ++r;
        }
    }
}

const SymIndexTable& SymIndexTable::get(int m) {
    if (m < 0 || m > 16) throw NumericalError("symmetric tensor order out of range: " + std::to_string(m));
    static std::array<const SymIndexTable*, 17> tables{};
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    if (!tables[m]) tables[m] = new SymIndexTable(m);
    return *tables[m];
}

SymTensor::SymTensor(int m, Eigen::VectorXd coeffs) : m_(m), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != dim_sym(m))
        throw NumericalError("symmetric tensor coefficient count mismatch");
}

SymTensor& SymTensor::operator+=(const SymTensor& rhs) {
    if (rhs.m_ != m_) throw NumericalError("symmetric tensor order mismatch");
    coeffs_ += rhs.coeffs_;
    return *this;
}

SymTensor sym_power(const Vec3& v, int p) {
    SymTensor out(p);
    const auto& table = SymIndexTable::get(p);
    for (int r = 0; r < table.size(); ++r) {
        const MultiIndex& idx = table.index(r);
        out[r] = std::pow(v[0], idx.a) * std::pow(v[1], idx.b) * std::pow(v[2], idx.c);
    }
    return out;
}

SymTensor sym_product(const SymTensor& s, const SymTensor& t) {
    const int p = s.order(), q = t.order();
    const auto& ts = SymIndexTable::get(p);
    const auto& tt = SymIndexTable::get(q);
    const auto& to = SymIndexTable::get(p + q);
    SymTensor out(p + q);
    // Identified with polynomials via P_s(y) = sum_J mult(J) s_J y^J, the
    // symmetric product is the polynomial product; divide the convolved
    // weighted coefficients by the output multiplicity.
    for (int i = 0; i < ts.size(); ++i) {
        const double si = ts.multiplicity(i) * s[i];
        if (si == 0.0) continue;
        const MultiIndex& a = ts.index(i);
        for (int j = 0; j < tt.size(); ++j) {
            const double tj = tt.multiplicity(j) * t[j];
            if (tj == 0.0) continue;
            const MultiIndex& b = tt.index(j);
            const MultiIndex sum{a.a + b.a, a.b + b.b, a.c + b.c};
            out[sum.rank()] += si * tj;
        }
    }
    for (int r = 0; r < to.size(); ++r) out[r] /= to.multiplicity(r);
    return out;
}

double contract_full(const SymTensor& t, std::span<const Vec3> vs) {
    const int m = t.order();
    if (static_cast<int>(vs.size()) != m)
        throw NumericalError("contract_full: need exactly m vectors");
    if (m == 0) return t[0];
    // Iterate over all 3^m index tuples.
    std::vector<int> tuple(m, 0);
    double acc = 0.0;
    while (true) {
        int a = 0, b = 0;
        double prod = 1.0;
        for (int s = 0; s < m; ++s) {
            prod *= vs[s][tuple[s]];
            a += tuple[s] == 0;
            b += tuple[s] == 1;
        }
        acc += prod * t.at(MultiIndex{a, b, m - a - b});
        int carry = m - 1;
        while (carry >= 0 && tuple[carry] == 2) tuple[carry--] = 0;
        if (carry < 0) break;
        ++tuple[carry];
    }
    return acc;
}

double weighted_inner(const SymTensor& s, const SymTensor& t) {
    if (s.order() != t.order()) throw NumericalError("weighted_inner: order mismatch");
    const auto& table = SymIndexTable::get(s.order());
    return s.coeffs().cwiseProduct(t.coeffs()).dot(table.multiplicities());
}

} // namespace trt
