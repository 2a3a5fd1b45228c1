#pragma once

#include <hstv/mat2.hpp>

#include <limits>
#include <string>

namespace hstv {

/// Schatten exponent p in [1, inf].
class SchattenP {
public:
    /// Throws std::invalid_argument unless p >= 1 (p may be +inf).
    explicit SchattenP(double p);

    static SchattenP one() { return SchattenP(1.0); }
    static SchattenP two() { return SchattenP(2.0); }
    static SchattenP inf() { return SchattenP(std::numeric_limits<double>::infinity()); }
    /// Parses "1", "2", "inf" or any real >= 1.
    static SchattenP parse(const std::string& text);

    double value() const { return p_; }
    bool is_inf() const { return p_ == std::numeric_limits<double>::infinity(); }
    /// Conjugate exponent p* with 1/p + 1/p* = 1.
    SchattenP conjugate() const;
    std::string to_string() const;

    friend bool operator==(SchattenP, SchattenP) = default;

private:
    double p_;
};

struct SingularValues {
    double s1; ///< largest
    double s2; ///< smallest, >= 0
};

/// Closed-form singular values of a 2x2 matrix.
SingularValues singular_values(const Mat2& m);

/// l_p norm of the singular-value vector.
double schatten_norm(const Mat2& m, SchattenP p);

/// l_p norm of a two-vector (|a|, |b|); shared by the norm and its dual.
double lp_norm2(double a, double b, SchattenP p);

struct EigenFrame {
    Mat2 diagonal;          ///< R(theta)^T M R(theta)
    double theta = 0.0;     ///< in [0, pi/2)
    bool isotropic = false; ///< eigenvalues coincide; theta is 0 by convention
};

/// Eigendecomposition of a symmetric matrix, normalised so that the rotation
/// angle lies in [0, pi/2). Composing the eigenvector frame with a signed
/// permutation realises the normalisation; it swaps the diagonal entries.
/// Throws hstv::Error if |m12 - m21| > tol.
EigenFrame sym_eigen_frame(const Mat2& m, double tol = 1e-12);

/// Lower bound for |M|_p obtained as max M . N over a deterministic lattice of
/// N with |N|_{p*} = 1. Converges from below as `samples` grows. Test oracle.
double dual_norm_estimate(const Mat2& m, SchattenP p, int samples);

} // namespace hstv
