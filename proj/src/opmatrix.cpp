#include "fracwb/opmatrix.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace fracwb {

std::string to_string(Provenance p) {
    switch (p) {
    case Provenance::Generator: return "generator";
    case Provenance::Weight: return "weight";
    case Provenance::Transform: return "transform";
    case Provenance::Elliptic: return "elliptic";
    case Provenance::Assembled: return "assembled";
    }
    return "assembled";
}

Provenance provenance_from_string(const std::string& s) {
    if (s == "generator") return Provenance::Generator;
    if (s == "weight") return Provenance::Weight;
    if (s == "transform") return Provenance::Transform;
    if (s == "elliptic") return Provenance::Elliptic;
    if (s == "assembled") return Provenance::Assembled;
    throw std::invalid_argument("unknown provenance tag: " + s);
}

OpMatrix::OpMatrix(CMat a, RVecE weights, Provenance p) : A(std::move(a)), w(std::move(weights)), provenance(p) {
    validate();
}

OpMatrix OpMatrix::plain(CMat a, Provenance p) {
    RVecE w = RVecE::Ones(a.rows());
    return OpMatrix(std::move(a), std::move(w), p);
}

void OpMatrix::validate() const {
    require(A.rows() == A.cols(), "OpMatrix: matrix must be square");
    require(w.size() == A.rows(), "OpMatrix: one weight per row required");
    require(A.allFinite(), "OpMatrix: entries must be finite");
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        require(w[i] > 0.0 && std::isfinite(w[i]), "OpMatrix: weights must be positive");
    }
}

cplx OpMatrix::inner(const CVecE& u, const CVecE& v) const {
    cplx s{};
    for (Eigen::Index i = 0; i < u.size(); ++i) s += w[i] * u[i] * std::conj(v[i]);
    return s;
}

double OpMatrix::norm(const CVecE& u) const { return std::sqrt(inner(u, u).real()); }

OpMatrix OpMatrix::adjoint() const {
    CMat B = A.adjoint();
    for (Eigen::Index i = 0; i < B.rows(); ++i) {
        for (Eigen::Index j = 0; j < B.cols(); ++j) B(i, j) *= w[j] / w[i];
    }
    OpMatrix out;
    out.A = std::move(B);
    out.w = w;
    out.provenance = provenance;
    return out;
}

CMat OpMatrix::unitary_form() const {
    RVecE s = w.cwiseSqrt();
    CMat B = A;
    for (Eigen::Index i = 0; i < B.rows(); ++i) {
        for (Eigen::Index j = 0; j < B.cols(); ++j) B(i, j) *= s[i] / s[j];
    }
    return B;
}

CMat OpMatrix::from_unitary_form(const CMat& B) const {
    RVecE s = w.cwiseSqrt();
    CMat M = B;
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) *= s[j] / s[i];
    }
    return M;
}

double spectral_norm(const CMat& M) {
    if (M.size() == 0) return 0.0;
    if (M.rows() <= 16) return Eigen::JacobiSVD<CMat>(M).singularValues()(0);
    return Eigen::BDCSVD<CMat>(M).singularValues()(0);
}

double OpMatrix::op_norm() const { return spectral_norm(unitary_form()); }

namespace {
void same_space(const OpMatrix& a, const OpMatrix& b) {
    require(a.size() == b.size(), "OpMatrix: size mismatch");
    require((a.w - b.w).cwiseAbs().maxCoeff() <= 1e-14 * a.w.cwiseAbs().maxCoeff(),
            "OpMatrix: operators live in different weighted spaces");
}
} // namespace

OpMatrix OpMatrix::operator*(const OpMatrix& o) const {
    same_space(*this, o);
    return OpMatrix(A * o.A, w, Provenance::Assembled);
}

OpMatrix OpMatrix::operator+(const OpMatrix& o) const {
    same_space(*this, o);
    return OpMatrix(A + o.A, w, Provenance::Assembled);
}

OpMatrix OpMatrix::operator-(const OpMatrix& o) const {
    same_space(*this, o);
    return OpMatrix(A - o.A, w, Provenance::Assembled);
}

OpMatrix OpMatrix::scaled(cplx s) const { return OpMatrix(A * s, w, provenance); }

OpMatrix OpMatrix::inverse() const {
    Eigen::FullPivLU<CMat> lu(A);
    require(lu.isInvertible(), "OpMatrix: operator is singular");
    return OpMatrix(lu.inverse(), w, provenance);
}

OpMatrix OpMatrix::identity(const RVecE& w, Provenance p) {
    return OpMatrix(CMat::Identity(w.size(), w.size()), w, p);
}

OpMatrix OpMatrix::diagonal(const CVecE& d, const RVecE& w, Provenance p) {
    return OpMatrix(CMat(d.asDiagonal()), w, p);
}

// ---------------------------------------------------------------------------

namespace {

static_assert(std::endian::native == std::endian::little, "binary layout assumes a little-endian host");

void put_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void put_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), 8); }

std::uint64_t get_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 8);
    require(static_cast<bool>(is), "read_binary: truncated header");
    return v;
}

double get_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), 8);
    require(static_cast<bool>(is), "read_binary: truncated payload");
    return v;
}

} // namespace

void write_binary(const std::string& path, const OpMatrix& m, const nlohmann::json& meta) {
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os), "write_binary: cannot open " + path);
    const auto N = static_cast<std::uint64_t>(m.size());
    put_u64(os, N);
    for (Eigen::Index i = 0; i < m.w.size(); ++i) put_f64(os, m.w[i]);
    for (Eigen::Index i = 0; i < m.A.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.A.cols(); ++j) {
            put_f64(os, m.A(i, j).real());
            put_f64(os, m.A(i, j).imag());
        }
    }
    nlohmann::json side = meta.is_object() ? meta : nlohmann::json::object();
    side["N"] = N;
    side["provenance"] = to_string(m.provenance);
    side["layout"] = "u64 N; f64 weights[N]; f64 (re, im)[N*N] row-major; little-endian";
    std::ofstream js(path + ".json");
    js << side.dump(2) << "\n";
}

OpMatrix read_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(static_cast<bool>(is), "read_binary: cannot open " + path);
    const auto N = static_cast<Eigen::Index>(get_u64(is));
    require(N > 0 && N < (1 << 16), "read_binary: implausible dimension");
    RVecE w(N);
    for (Eigen::Index i = 0; i < N; ++i) w[i] = get_f64(is);
    CMat A(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index j = 0; j < N; ++j) {
            double re = get_f64(is), im = get_f64(is);
            A(i, j) = cplx(re, im);
        }
    }
    Provenance p = Provenance::Assembled;
    std::ifstream js(path + ".json");
    if (js) {
        auto meta = nlohmann::json::parse(js, nullptr, false);
        if (meta.is_object() && meta.contains("provenance")) p = provenance_from_string(meta["provenance"]);
    }
    return OpMatrix(std::move(A), std::move(w), p);
}

} // namespace fracwb
