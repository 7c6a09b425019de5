#include "fracwb/raymesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

namespace fracwb {

void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
    require(n >= 1, "gauss_legendre: need at least one node");
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
            double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        x[i] = 0.5 * (a + b) - 0.5 * (b - a) * z;
        w[i] = (b - a) / ((1.0 - z * z) * dp * dp);
    }
}

namespace {

Ray make_ray(std::vector<double> e, double weight, double length, std::size_t intervals) {
    Ray ray;
    ray.direction = std::move(e);
    ray.weight = weight;
    ray.length = length;
    ray.r.resize(intervals + 1);
    for (std::size_t j = 0; j <= intervals; ++j) {
        ray.r[j] = length * static_cast<double>(j) / static_cast<double>(intervals);
    }
    ray.r.back() = length;
    ray.w.assign(intervals + 1, 0.0);
    for (std::size_t j = 0; j < intervals; ++j) {
        double h = ray.r[j + 1] - ray.r[j];
        ray.w[j] += 0.5 * h;
        ray.w[j + 1] += 0.5 * h;
    }
    return ray;
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace

double RayMesh::half_sphere_measure(int dim) {
    switch (dim) {
    case 1: return 1.0;
    case 2: return kPi;
    case 3: return 2.0 * kPi;
    default: {
        // Half of 2 pi^{n/2} / Gamma(n/2).
        return std::pow(kPi, dim / 2.0) / std::tgamma(dim / 2.0);
    }
    }
}

std::shared_ptr<const RayMesh> RayMesh::interval(double a, double b, std::size_t intervals) {
    require(b > a, "RayMesh::interval: need a < b");
    require(intervals >= 1, "RayMesh::interval: empty grid");
    std::vector<double> x(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) {
        x[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(intervals);
    }
    x.back() = b;
    return interval(x);
}

std::shared_ptr<const RayMesh> RayMesh::interval(const std::vector<double>& nodes) {
    require(nodes.size() >= 2, "RayMesh::interval: need at least two nodes");
    std::shared_ptr<RayMesh> m(new RayMesh());
    m->dim_ = 1;
    m->P_ = {nodes.front()};
    m->shape_ = "interval";
    Ray ray;
    ray.direction = {1.0};
    ray.weight = 1.0;
    ray.r.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) ray.r[i] = nodes[i] - nodes.front();
    ray.length = ray.r.back();
    ray.w.assign(nodes.size(), 0.0);
    for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
        double h = nodes[j + 1] - nodes[j];
        ray.w[j] += 0.5 * h;
        ray.w[j + 1] += 0.5 * h;
    }
    m->diam_ = ray.length;
    m->rays_.push_back(std::move(ray));
    const double a = nodes.front(), b = nodes.back();
    m->finalize([a, b](const std::vector<double>& q) { return q[0] >= a - 1e-12 && q[0] <= b + 1e-12; });
    return m;
}

std::shared_ptr<const RayMesh> RayMesh::ball(int dim, double radius, int n_polar, int n_azimuth,
                                             std::size_t intervals) {
    require(dim == 2 || dim == 3, "RayMesh::ball: dim must be 2 or 3");
    require(radius > 0.0 && n_polar >= 1 && intervals >= 1, "RayMesh::ball: bad parameters");
    std::shared_ptr<RayMesh> m(new RayMesh());
    m->dim_ = dim;
    m->P_.assign(dim, 0.0);
    m->diam_ = 2.0 * radius;
    m->shape_ = "ball";
    std::vector<double> th, wt;
    if (dim == 2) {
        gauss_legendre(n_polar, -kPi / 2, kPi / 2, th, wt);
        for (int i = 0; i < n_polar; ++i) {
            double d = 2.0 * radius * std::cos(th[i]);
            m->rays_.push_back(make_ray({std::sin(th[i]), std::cos(th[i])}, wt[i], d, intervals));
        }
    } else {
        require(n_azimuth >= 1, "RayMesh::ball: need azimuthal directions");
        // Gauss-Legendre in u = cos(theta): sin(theta) d theta = du, so the measure is exact
        gauss_legendre(n_polar, 0.0, 1.0, th, wt);
        for (int i = 0; i < n_polar; ++i) {
            for (int k = 0; k < n_azimuth; ++k) {
                double ph = 2.0 * kPi * (k + 0.5) / n_azimuth;
                double u = th[i], st = std::sqrt(1.0 - u * u);
                double d = 2.0 * radius * u;
                m->rays_.push_back(make_ray({st * std::cos(ph), st * std::sin(ph), u},
                                            wt[i] * 2.0 * kPi / n_azimuth, d, intervals));
            }
        }
    }
    std::vector<double> c(dim, 0.0);
    c[dim - 1] = radius;
    m->finalize([c, radius](const std::vector<double>& q) {
        double s = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) s += (q[i] - c[i]) * (q[i] - c[i]);
        return std::sqrt(s) <= radius * (1.0 + 1e-12);
    });
    return m;
}

std::shared_ptr<const RayMesh> RayMesh::square(double side, int n_dir, std::size_t intervals) {
    require(side > 0.0 && n_dir >= 3 && intervals >= 1, "RayMesh::square: bad parameters");
    std::shared_ptr<RayMesh> m(new RayMesh());
    m->dim_ = 2;
    m->P_ = {side / 2.0, 0.0};
    m->diam_ = side * std::sqrt(2.0);
    m->shape_ = "square";
    const double t1 = std::atan2(side, side / 2.0);
    const double cuts[4] = {0.0, t1, kPi - t1, kPi};
    const int per = n_dir / 3;
    for (int s = 0; s < 3; ++s) {
        int count = s == 1 ? n_dir - 2 * per : per;
        std::vector<double> th, wt;
        gauss_legendre(count, cuts[s], cuts[s + 1], th, wt);
        for (int i = 0; i < count; ++i) {
            double cx = std::cos(th[i]), sy = std::sin(th[i]);
            double d = side / sy;
            if (cx > 0) d = std::min(d, (side / 2.0) / cx);
            if (cx < 0) d = std::min(d, (side / 2.0) / -cx);
            m->rays_.push_back(make_ray({cx, sy}, wt[i], d, intervals));
        }
    }
    m->finalize([side](const std::vector<double>& q) {
        const double tol = 1e-12 * side;
        return q[0] >= -tol && q[0] <= side + tol && q[1] >= -tol && q[1] <= side + tol;
    });
    return m;
}

void RayMesh::finalize(const Membership& inside) {
    validate();
    if (!inside) return;
    // A ray from P leaves a convex domain exactly once: interior samples are
    // inside and the point just beyond d(e) is outside.
    for (std::size_t k = 0; k < rays_.size(); ++k) {
        const double d = rays_[k].length;
        for (double s : {0.1, 0.37, 0.5, 0.81, 1.0}) {
            require(inside(point(k, s * d)), "RayMesh: ray " + std::to_string(k) + " leaves the domain early");
        }
        require(!inside(point(k, d * (1.0 + 1e-6) + 1e-9)),
                "RayMesh: ray " + std::to_string(k) + " does not exit at d(e)");
    }
    certified_ = true;
}

void RayMesh::validate() const {
    require(dim_ >= 1 && static_cast<int>(P_.size()) == dim_, "RayMesh: origin dimension mismatch");
    require(!rays_.empty(), "RayMesh: no directions");
    for (const auto& ray : rays_) {
        require(static_cast<int>(ray.direction.size()) == dim_, "RayMesh: direction dimension mismatch");
        require(std::abs(norm2(ray.direction) - 1.0) <= 1e-12, "RayMesh: direction is not a unit vector");
        require(ray.weight > 0.0, "RayMesh: solid-angle weights must be positive");
        require(ray.length > 0.0, "RayMesh: ray length must be positive");
        require(ray.length <= diam_ * (1.0 + 1e-12), "RayMesh: ray longer than the diameter");
        require(ray.r.size() >= 2 && ray.r.front() == 0.0, "RayMesh: radial nodes must start at 0");
        require(std::abs(ray.r.back() - ray.length) <= 1e-12 * ray.length, "RayMesh: radial nodes must end at d(e)");
        for (std::size_t j = 1; j < ray.r.size(); ++j) {
            require(ray.r[j] > ray.r[j - 1], "RayMesh: radial nodes must increase");
        }
        require(ray.w.size() == ray.r.size(), "RayMesh: radial weights size mismatch");
    }
    if (dim_ <= 3) {
        require(std::abs(direction_measure() - half_sphere_measure(dim_)) <= 1e-8,
                "RayMesh: solid-angle weights do not sum to the half-sphere measure");
    }
}

std::vector<double> RayMesh::point(std::size_t ray, std::size_t node) const {
    return point(ray, rays_[ray].r[node]);
}

std::vector<double> RayMesh::point(std::size_t ray, double r) const {
    std::vector<double> q(P_);
    for (int i = 0; i < dim_; ++i) q[i] += r * rays_[ray].direction[i];
    return q;
}

double RayMesh::direction_measure() const {
    double s = 0.0;
    for (const auto& r : rays_) s += r.weight;
    return s;
}

double RayMesh::volume() const {
    double v = 0.0;
    for (const auto& ray : rays_) {
        double acc = 0.0;
        for (std::size_t j = 0; j < ray.r.size(); ++j) acc += ray.w[j] * std::pow(ray.r[j], dim_ - 1);
        v += ray.weight * acc;
    }
    return v;
}

nlohmann::json RayMesh::to_json() const {
    nlohmann::json j;
    j["dim"] = dim_;
    j["P"] = P_;
    j["diam"] = diam_;
    j["shape"] = shape_;
    auto& dirs = j["directions"] = nlohmann::json::array();
    for (const auto& ray : rays_) {
        dirs.push_back({{"e", ray.direction}, {"weight", ray.weight}, {"length", ray.length}, {"nodes", ray.r}});
    }
    return j;
}

std::shared_ptr<const RayMesh> RayMesh::from_json(const nlohmann::json& j) {
    std::shared_ptr<RayMesh> m(new RayMesh());
    m->dim_ = j.at("dim").get<int>();
    m->P_ = j.at("P").get<std::vector<double>>();
    m->diam_ = j.at("diam").get<double>();
    m->shape_ = j.value("shape", std::string("custom"));
    for (const auto& d : j.at("directions")) {
        Ray ray;
        ray.direction = d.at("e").get<std::vector<double>>();
        ray.weight = d.at("weight").get<double>();
        ray.length = d.at("length").get<double>();
        ray.r = d.at("nodes").get<std::vector<double>>();
        ray.w.assign(ray.r.size(), 0.0);
        for (std::size_t k = 0; k + 1 < ray.r.size(); ++k) {
            double h = ray.r[k + 1] - ray.r[k];
            ray.w[k] += 0.5 * h;
            ray.w[k + 1] += 0.5 * h;
        }
        m->rays_.push_back(std::move(ray));
    }
    m->validate();
    return m;
}

// ---------------------------------------------------------------------------

RayFn::RayFn(RayMeshPtr mesh, std::vector<CVec> values) : mesh_(std::move(mesh)), values_(std::move(values)) {
    require(mesh_ != nullptr, "RayFn: null mesh");
    require(values_.size() == mesh_->ray_count(), "RayFn: one value array per ray required");
    for (std::size_t k = 0; k < values_.size(); ++k) {
        require(values_[k].size() == mesh_->rays()[k].r.size(), "RayFn: value count must equal node count");
    }
}

RayFn RayFn::zeros(RayMeshPtr mesh) {
    std::vector<CVec> v;
    for (const auto& ray : mesh->rays()) v.emplace_back(ray.r.size(), cplx{});
    return RayFn(std::move(mesh), std::move(v));
}

RayFn RayFn::sample(RayMeshPtr mesh, const std::function<cplx(const std::vector<double>&)>& f) {
    RayFn out = zeros(mesh);
    for (std::size_t k = 0; k < mesh->ray_count(); ++k) {
        for (std::size_t j = 0; j < mesh->rays()[k].r.size(); ++j) out.values_[k][j] = f(mesh->point(k, j));
    }
    return out;
}

RayFn RayFn::sample_radial(RayMeshPtr mesh, const std::function<cplx(std::size_t, double)>& g) {
    RayFn out = zeros(mesh);
    for (std::size_t k = 0; k < mesh->ray_count(); ++k) {
        const auto& r = mesh->rays()[k].r;
        for (std::size_t j = 0; j < r.size(); ++j) out.values_[k][j] = g(k, r[j]);
    }
    return out;
}

namespace {
template <class Op>
RayFn zip(const RayFn& a, const RayFn& b, Op op) {
    require(a.mesh() == b.mesh(), "RayFn: mesh mismatch");
    std::vector<CVec> v(a.values());
    for (std::size_t k = 0; k < v.size(); ++k) {
        for (std::size_t j = 0; j < v[k].size(); ++j) v[k][j] = op(a.values()[k][j], b.values()[k][j]);
    }
    return RayFn(a.mesh(), std::move(v));
}
} // namespace

RayFn RayFn::operator-(const RayFn& o) const { return zip(*this, o, std::minus<>{}); }
RayFn RayFn::operator+(const RayFn& o) const { return zip(*this, o, std::plus<>{}); }
RayFn RayFn::operator*(const RayFn& o) const { return zip(*this, o, std::multiplies<>{}); }
RayFn RayFn::scaled(cplx s) const {
    std::vector<CVec> v(values_);
    for (auto& ray : v) for (auto& x : ray) x *= s;
    return RayFn(mesh_, std::move(v));
}

double lp_norm(const RayFn& f, double p, bool skip_origin) {
    require(p >= 1.0, "lp_norm: p must be >= 1");
    const auto& m = *f.mesh();
    require(m.dim() <= 3, "lp_norm: full norms need a solid-angle quadrature (dim <= 3)");
    double total = 0.0;
    for (std::size_t k = 0; k < m.ray_count(); ++k) {
        const auto& ray = m.rays()[k];
        double acc = 0.0;
        for (std::size_t j = skip_origin ? 1 : 0; j < ray.r.size(); ++j) {
            double jac = m.dim() == 1 ? 1.0 : std::pow(ray.r[j], m.dim() - 1);
            acc += ray.w[j] * jac * std::pow(std::abs(f.ray(k)[j]), p);
        }
        total += ray.weight * acc;
    }
    return std::pow(total, 1.0 / p);
}

cplx inner(const RayFn& f, const RayFn& g, const RayFn* rho, bool skip_origin) {
    const auto& m = *f.mesh();
    require(f.mesh() == g.mesh(), "inner: mesh mismatch");
    cplx total{};
    for (std::size_t k = 0; k < m.ray_count(); ++k) {
        const auto& ray = m.rays()[k];
        cplx acc{};
        for (std::size_t j = skip_origin ? 1 : 0; j < ray.r.size(); ++j) {
            double jac = m.dim() == 1 ? 1.0 : std::pow(ray.r[j], m.dim() - 1);
            double wr = rho ? rho->ray(k)[j].real() : 1.0;
            acc += ray.w[j] * jac * wr * f.ray(k)[j] * std::conj(g.ray(k)[j]);
        }
        total += ray.weight * acc;
    }
    return total;
}

void write_csv(std::ostream& os, const RayFn& f) {
    os << "direction,node,r,re,im\n";
    char buf[128];
    for (std::size_t k = 0; k < f.values().size(); ++k) {
        const auto& r = f.mesh()->rays()[k].r;
        for (std::size_t j = 0; j < r.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%.17g\n", k, j, r[j], f.ray(k)[j].real(),
                          f.ray(k)[j].imag());
            os << buf;
        }
    }
}

// ---------------------------------------------------------------------------

double DirWeight::inf_rho() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& ray : rho.values()) for (const auto& v : ray) m = std::min(m, v.real());
    return m;
}

void DirWeight::validate(std::size_t audit_pairs, unsigned seed) const {
    require(lambda > 0.0 && lambda <= 1.0, "DirWeight: Lipschitz exponent must lie in (0,1]");
    require(lipschitz >= 0.0, "DirWeight: Lipschitz constant must be non-negative");
    const auto& m = *rho.mesh();
    for (std::size_t k = 0; k < m.ray_count(); ++k) {
        const auto& vals = rho.ray(k);
        for (std::size_t j = 0; j < vals.size(); ++j) {
            require(vals[j].imag() == 0.0 && vals[j].real() >= 0.0 && std::isfinite(vals[j].real()),
                    "DirWeight: rho must be real and non-negative");
            if (monotone && j > 0) {
                require(vals[j].real() <= vals[j - 1].real() + 1e-14,
                        "DirWeight: rho is flagged monotone but increases along ray " + std::to_string(k));
            }
        }
    }
    std::mt19937 gen(seed);
    std::uniform_int_distribution<std::size_t> pick_ray(0, m.ray_count() - 1);
    for (std::size_t s = 0; s < audit_pairs; ++s) {
        std::size_t k1 = pick_ray(gen), k2 = pick_ray(gen);
        std::uniform_int_distribution<std::size_t> n1(0, m.rays()[k1].r.size() - 1), n2(0, m.rays()[k2].r.size() - 1);
        std::size_t j1 = n1(gen), j2 = n2(gen);
        auto q1 = m.point(k1, j1), q2 = m.point(k2, j2);
        double dist = 0.0;
        for (std::size_t i = 0; i < q1.size(); ++i) dist += (q1[i] - q2[i]) * (q1[i] - q2[i]);
        dist = std::sqrt(dist);
        double diff = std::abs(rho.ray(k1)[j1].real() - rho.ray(k2)[j2].real());
        require(diff <= lipschitz * std::pow(dist, lambda) * (1.0 + 1e-9) + 1e-12,
                "DirWeight: Lipschitz audit failed");
    }
}

} // namespace fracwb
