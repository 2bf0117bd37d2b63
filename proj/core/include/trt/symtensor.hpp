#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "trt/types.hpp"

namespace trt {

/// Number of independent components of a symmetric m-tensor in R^3.
constexpr int dim_sym(int m) { return (m + 1) * (m + 2) / 2; }

/// Exponent triple (a,b,c) with a+b+c = m: the number of occurrences of
/// coordinates 1, 2, 3 among the m slots of a symmetric index tuple.
///
/// Components are ordered lexicographically by descending exponent of
/// coordinate 1, then descending exponent of coordinate 2:
///   (m,0,0), (m-1,1,0), (m-1,0,1), (m-2,2,0), (m-2,1,1), (m-2,0,2), ...
struct MultiIndex {
    int a = 0, b = 0, c = 0;

    int order() const { return a + b + c; }

    /// Position of this index in the fixed component ordering.
    int rank() const {
        const int m = order();
        const int d = m - a;
        return d * (d + 1) / 2 + (d - b);
    }

    static MultiIndex from_rank(int m, int r);

    /// m! / (a! b! c!), the number of distinct index tuples in the class.
    double multiplicity() const;

    bool operator==(const MultiIndex&) const = default;
};

/// Per-order lookup tables: component list, multiplicities and their
/// square roots. Built once per order and shared (immutable after init).
class SymIndexTable {
  public:
    static const SymIndexTable& get(int m);

    int order() const { return m_; }
    int size() const { return static_cast<int>(indices_.size()); }
    const std::vector<MultiIndex>& indices() const { return indices_; }
    const Eigen::VectorXd& multiplicities() const { return mult_; }
    const Eigen::VectorXd& sqrt_multiplicities() const { return sqrt_mult_; }
    const MultiIndex& index(int rank) const { return indices_[rank]; }
    double multiplicity(int rank) const { return mult_[rank]; }

  private:
    explicit SymIndexTable(int m);
    int m_;
    std::vector<MultiIndex> indices_;
    Eigen::VectorXd mult_;
    Eigen::VectorXd sqrt_mult_;
};

/// Symmetric m-tensor stored as its dim_sym(m) unique components,
/// unweighted (multinomial multiplicities live in the inner product).
class SymTensor {
  public:
    SymTensor() : m_(0), coeffs_(Eigen::VectorXd::Zero(1)) {}
    explicit SymTensor(int m) : m_(m), coeffs_(Eigen::VectorXd::Zero(dim_sym(m))) {}
    SymTensor(int m, Eigen::VectorXd coeffs);

    int order() const { return m_; }
    int size() const { return static_cast<int>(coeffs_.size()); }

    double operator[](int rank) const { return coeffs_[rank]; }
    double& operator[](int rank) { return coeffs_[rank]; }
    double at(const MultiIndex& idx) const { return coeffs_[idx.rank()]; }
    double& at(const MultiIndex& idx) { return coeffs_[idx.rank()]; }

    const Eigen::VectorXd& coeffs() const { return coeffs_; }
    Eigen::VectorXd& coeffs() { return coeffs_; }

    SymTensor& operator+=(const SymTensor& rhs);
    SymTensor& operator*=(double s) { coeffs_ *= s; return *this; }

  private:
    int m_;
    Eigen::VectorXd coeffs_;
};

/// v^(symmetric power p): component at (a,b,c) is v1^a v2^b v3^c.
SymTensor sym_power(const Vec3& v, int p);

/// Symmetrized tensor product. Under the component convention here the
/// mixed component of u (.) v at {i,j} is (u_i v_j + u_j v_i) / 2.
SymTensor sym_product(const SymTensor& s, const SymTensor& t);

/// Full contraction f_{j1..jm} v1^{j1} ... vm^{jm}, expanded over all
/// 3^m index tuples with symmetric-class multiplicities.
double contract_full(const SymTensor& t, std::span<const Vec3> vs);

/// Multinomial-weighted inner product: sum_J mult(J) s_J t_J.
/// Satisfies <u^(.m), v^(.m)> = (u . v)^m.
double weighted_inner(const SymTensor& s, const SymTensor& t);

} // namespace trt
