#pragma once

// Dense complex operator on a grid with a quadrature-weighted inner product
// <u, v> = sum_k w_k u_k conj(v_k).

#include "fracwb/types.hpp"

#include "json.hpp"

#include <Eigen/Dense>

#include <string>

namespace fracwb {

using CMat = Eigen::MatrixXcd;
using CVecE = Eigen::VectorXcd;
using RVecE = Eigen::VectorXd;

enum class Provenance { Generator, Weight, Transform, Elliptic, Assembled };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct OpMatrix {
    CMat A;
    RVecE w;
    Provenance provenance = Provenance::Assembled;

    OpMatrix() = default;
    OpMatrix(CMat a, RVecE weights, Provenance p);
    /// Unit weights.
    static OpMatrix plain(CMat a, Provenance p = Provenance::Assembled);

    Eigen::Index size() const { return A.rows(); }

    /// Checks squareness, finite entries and positive weights.
    void validate() const;

    cplx inner(const CVecE& u, const CVecE& v) const;
    double norm(const CVecE& u) const;

    /// Weighted adjoint D_w^{-1} A^H D_w.
    OpMatrix adjoint() const;
    /// Operator norm induced by the weighted inner product.
    double op_norm() const;
    /// D_w^{1/2} A D_w^{-1/2}: the same operator in an orthonormal basis.
    CMat unitary_form() const;
    CMat from_unitary_form(const CMat& B) const;

    OpMatrix operator*(const OpMatrix& o) const;
    OpMatrix operator+(const OpMatrix& o) const;
    OpMatrix operator-(const OpMatrix& o) const;
    OpMatrix scaled(cplx s) const;
    OpMatrix inverse() const;
    static OpMatrix identity(const RVecE& w, Provenance p = Provenance::Weight);
    static OpMatrix diagonal(const CVecE& d, const RVecE& w, Provenance p = Provenance::Weight);
};

/// Binary layout: u64 N, N f64 weights, then 2 N^2 f64 (re, im) row-major,
/// little-endian. The JSON sidecar at `path + ".json"` holds the metadata.
void write_binary(const std::string& path, const OpMatrix& m, const nlohmann::json& meta = {});
OpMatrix read_binary(const std::string& path);

/// Spectral norm of a plain matrix.
double spectral_norm(const CMat& M);

} // namespace fracwb
