// SPDX-License-Identifier: Apache-2.0
//
// prdoa: partial-relaxation direction-of-arrival estimation
// Copyright (C) 2026 The prdoa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef PRDOA_RANK_ONE_EIG_HPP
#define PRDOA_RANK_ONE_EIG_HPP

// Eigenvalues of the rank-one modified diagonal matrix  D - rho z z^H  (rho > 0).
//
// The problem is first deflated: coordinates with a vanishing z entry are decoupled and
// near-identical diagonal entries are merged by a Givens rotation. The remaining roots of the
// secular function
//
//     p(x) = 1 - rho * sum_k |z_k|^2 / (d_k - x)
//
// strictly interlace the (distinct, descending) diagonal: d_1 > x_1 > d_2 > ... > d_K > x_K.
// Each root is found independently by fitting first-degree rational functions (value and slope)
// to the parts of p with poles above and below the bracket, and solving the resulting scalar
// equation in closed form. Iterates are kept inside a shrinking bracket; bisection is the fallback.

#include "errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

namespace prdoa
{
    struct RankOneMod
    {
        Eigen::VectorXd d;  // diagonal of D
        double rho = 1.0;   // > 0
        Eigen::VectorXcd z; // rank-one direction

        Eigen::Index size() const { return d.size(); }

        Eigen::MatrixXcd dense() const
        {
            Eigen::MatrixXcd A = -rho * z * z.adjoint();
            A.diagonal() += d.cast<std::complex<double>>();
            return A;
        }
    };

    struct KeptEigenvalue
    {
        double value;
        int multiplicity;
    };

    // Plane rotation acting on coordinates (keep, drop) of the original problem.
    // New basis vectors: g_keep = (c, s), g_drop = (-conj(s), conj(c)), so that
    // g_keep^H z = sqrt(|z_keep|^2 + |z_drop|^2) and g_drop^H z = 0.
    struct GivensRotation
    {
        Eigen::Index keep;
        Eigen::Index drop;
        std::complex<double> c;
        std::complex<double> s;
    };

    struct DeflationResult
    {
        std::vector<KeptEigenvalue> kept_eigenvalues;
        RankOneMod reduced;                           // strictly descending d, all z nonzero
        std::vector<GivensRotation> accumulated_rotation;
        std::vector<Eigen::Index> reduced_index;      // original coordinate of each reduced entry
        double spread = 0.0;                          // d_max - d_min + rho |z|^2

        // Kept values expanded by multiplicity, descending
        std::vector<double> kept_values() const
        {
            std::vector<double> out;
            for (const auto &k : kept_eigenvalues)
                out.insert(out.end(), static_cast<std::size_t>(k.multiplicity), k.value);
            std::sort(out.begin(), out.end(), std::greater<>());
            return out;
        }
    };

    enum class RootOrigin
    {
        Deflated,   // untouched diagonal entry
        ClosedForm, // single-entry reduced problem
        Iterated    // rational-approximation iteration
    };

    struct SecularRoots
    {
        std::vector<double> roots;   // descending
        std::vector<int> iterations; // per root, 0 unless iterated
        std::vector<RootOrigin> origin;
    };

    struct RootResult
    {
        double root;
        int iterations;
    };

    struct SecularOptions
    {
        double eps = 1e-9;   // stop when |x_new - x_old| < eps (1 + |x_old|)
        int max_iter = 100;
    };

    enum class Which
    {
        Largest,
        Smallest
    };

    // p(x) = 1 - rho sum |z_k|^2 / (d_k - x)
    inline double secular_value(const RankOneMod &mod, double x)
    {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < mod.size(); ++k)
        {
            const double delta = mod.d(k) - x;
            if (delta == 0.0)
                throw PoleEvaluation("secular_value: evaluated at a pole");
            acc += std::norm(mod.z(k)) / delta;
        }
        return 1.0 - mod.rho * acc;
    }

    // Eigenvalues by dense Hermitian EVD, descending. Reference path for verification.
    inline Eigen::VectorXd dense_eigenvalues(const Eigen::MatrixXcd &A)
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> evd(A, Eigen::EigenvaluesOnly);
        return evd.eigenvalues().reverse();
    }

    inline Eigen::VectorXd dense_eigenvalues(const RankOneMod &mod) { return dense_eigenvalues(mod.dense()); }

    namespace detail
    {
        inline double default_tolerance(std::size_t K) { return static_cast<double>(K) * std::numeric_limits<double>::epsilon(); }

        // Deflation on squared magnitudes. Reuses its buffers between calls.
        struct DeflationScratch
        {
            std::vector<Eigen::Index> order;     // original indices sorted by descending d
            std::vector<Eigen::Index> survivors; // original indices of reduced entries
            std::vector<double> d_red;
            std::vector<double> w_red;           // |z|^2 of reduced entries (merged)
            std::vector<Eigen::Index> deflated;  // original indices decoupled from the update
            std::vector<std::pair<Eigen::Index, Eigen::Index>> merges; // (keep, drop), in order
            double spread = 0.0;
            double w_total = 0.0;

            void sort_diagonal(std::span<const double> d)
            {
                order.resize(d.size());
                std::iota(order.begin(), order.end(), Eigen::Index(0));
                std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b)
                                 { return d[static_cast<std::size_t>(a)] > d[static_cast<std::size_t>(b)]; });
            }

            // d and w in original order; `order` must be current for d
            void run(std::span<const double> d, double rho, std::span<const double> w, double tol_z, double tol_d)
            {
                survivors.clear();
                d_red.clear();
                w_red.clear();
                deflated.clear();
                merges.clear();

                w_total = 0.0;
                for (double v : w)
                    w_total += v;
                const double d_hi = d[static_cast<std::size_t>(order.front())];
                const double d_lo = d[static_cast<std::size_t>(order.back())];
                spread = d_hi - d_lo + rho * w_total;

                const double w_floor = tol_z * tol_z * w_total;
                const double d_gap = tol_d * spread;
                for (Eigen::Index j : order)
                {
                    const auto ju = static_cast<std::size_t>(j);
                    if (w_total == 0.0 || w[ju] <= w_floor)
                    {
                        deflated.push_back(j);
                        continue;
                    }
                    if (!survivors.empty() && d_red.back() - d[ju] <= d_gap)
                    {
                        w_red.back() += w[ju];
                        merges.emplace_back(survivors.back(), j);
                        deflated.push_back(j);
                        continue;
                    }
                    survivors.push_back(j);
                    d_red.push_back(d[ju]);
                    w_red.push_back(w[ju]);
                }
            }
        };

        // k-th root (0-based) of 1 - rho sum w_j / (d_j - x) with d strictly descending, all w > 0
        inline RootResult solve_secular_root(std::span<const double> d, double rho, std::span<const double> w,
                                             std::size_t k, std::optional<double> x0, const SecularOptions &opt)
        {
            const std::size_t K = d.size();
            if (K == 1)
                return {d[0] - rho * w[0], 0};

            const bool has_lower = k + 1 < K;
            double w_total = 0.0;
            for (double v : w)
                w_total += v;
            double hi = d[k];
            double lo = has_lower ? d[k + 1] : d[K - 1] - rho * w_total;

            double x = (x0 && *x0 > lo && *x0 < hi) ? *x0 : 0.5 * (lo + hi);
            double best = x;
            for (int it = 1; it <= opt.max_iter; ++it)
            {
                // psi: poles d_0..d_k (above x), phi: poles d_{k+1}.. (below x)
                double psi = 0.0, dpsi = 0.0, phi = 0.0, dphi = 0.0;
                for (std::size_t j = 0; j <= k; ++j)
                {
                    const double delta = d[j] - x;
                    const double t = w[j] / delta;
                    psi -= t;
                    dpsi -= t / delta;
                }
                for (std::size_t j = k + 1; j < K; ++j)
                {
                    const double delta = d[j] - x;
                    const double t = w[j] / delta;
                    phi -= t;
                    dphi -= t / delta;
                }
                psi *= rho;
                dpsi *= rho;
                phi *= rho;
                dphi *= rho;
                const double pval = 1.0 + psi + phi;
                best = x;
                if (pval == 0.0)
                    return {x, it};
                // p decreases across the bracket
                if (pval > 0.0)
                    lo = x;
                else
                    hi = x;

                // psi ~ p_ + q / (d_k - x),  phi ~ r + s / (d_{k+1} - x)
                const double du = d[k] - x;
                const double q = dpsi * du * du;
                const double p_ = psi - q / du;
                double r = 0.0, s = 0.0, dl = 0.0;
                if (has_lower)
                {
                    dl = d[k + 1] - x;
                    s = dphi * dl * dl;
                    r = phi - s / dl;
                }
                const double c = 1.0 + p_ + r;

                // Solve c + q / (du - t) + s / (dl - t) = 0 for the step t
                double t = std::numeric_limits<double>::quiet_NaN();
                if (!has_lower)
                {
                    if (c > 0.0)
                        t = du + q / c;
                }
                else
                {
                    const double A = c;
                    const double B = -(c * (du + dl) + q + s);
                    const double C = du * dl * pval;
                    auto inside = [&](double v) { return std::isfinite(v) && v > dl && v < du; };
                    if (std::abs(A) <= std::numeric_limits<double>::epsilon() * (std::abs(B) / std::max(du - dl, std::numeric_limits<double>::min())))
                    {
                        t = -C / B;
                    }
                    else
                    {
                        const double disc = B * B - 4.0 * A * C;
                        if (disc >= 0.0)
                        {
                            const double sq = std::sqrt(disc);
                            const double den = B >= 0.0 ? -B - sq : -B + sq;
                            const double t1 = den / (2.0 * A);
                            const double t2 = den != 0.0 ? 2.0 * C / den : std::numeric_limits<double>::quiet_NaN();
                            const bool in1 = inside(t1), in2 = inside(t2);
                            if (in1 && !in2)
                                t = t1;
                            else if (in2 && !in1)
                                t = t2;
                        }
                    }
                }

                double xn = x + t;
                // Converged steps may round back onto the bracket end (x itself), so test first
                if (std::abs(t) < opt.eps * (1.0 + std::abs(x)) && xn >= lo && xn <= hi)
                    return {xn, it};
                if (!(xn > lo && xn < hi))
                    xn = 0.5 * (lo + hi);
                if (!(xn > lo && xn < hi)) // bracket collapsed to adjacent floats
                    return {x, it};
                if (std::abs(xn - x) < opt.eps * (1.0 + std::abs(x)))
                    return {xn, it};
                x = xn;
            }
            throw ConvergenceFailure("secular root: iteration cap exceeded", best, opt.max_iter);
        }
    }

    // Deflation with explicit tolerances: |z_k| <= tol_z |z| and
    // |d_k - d_i| <= tol_d * spread trigger decoupling.
    inline DeflationResult deflate(const Eigen::VectorXd &d, double rho, const Eigen::VectorXcd &z,
                                   double tol_z, double tol_d)
    {
        if (!(rho > 0.0) || !std::isfinite(rho))
            throw InvalidArgument("deflate: rho must be positive");
        if (d.size() != z.size() || d.size() == 0)
            throw InvalidArgument("deflate: d and z must have equal, nonzero length");

        const auto K = static_cast<std::size_t>(d.size());
        std::vector<double> dv(d.data(), d.data() + K);
        std::vector<double> w(K);
        for (std::size_t j = 0; j < K; ++j)
            w[j] = std::norm(z(static_cast<Eigen::Index>(j)));

        detail::DeflationScratch ds;
        ds.sort_diagonal(dv);
        ds.run(dv, rho, w, tol_z, tol_d);

        DeflationResult out;
        out.spread = ds.spread;

        // Replay merges with complex rotations; the surviving coordinate carries the combined weight
        Eigen::VectorXcd zc = z;
        for (const auto &[keep, drop] : ds.merges)
        {
            const double r = std::hypot(std::abs(zc(keep)), std::abs(zc(drop)));
            GivensRotation g{keep, drop, zc(keep) / r, zc(drop) / r};
            zc(keep) = r;
            zc(drop) = 0.0;
            out.accumulated_rotation.push_back(g);
        }

        std::vector<double> kept;
        for (Eigen::Index j : ds.deflated)
            kept.push_back(d(j));
        std::sort(kept.begin(), kept.end(), std::greater<>());
        for (double v : kept)
        {
            if (!out.kept_eigenvalues.empty() && out.kept_eigenvalues.back().value == v)
                ++out.kept_eigenvalues.back().multiplicity;
            else
                out.kept_eigenvalues.push_back({v, 1});
        }

        const auto R = static_cast<Eigen::Index>(ds.survivors.size());
        out.reduced.rho = rho;
        out.reduced.d.resize(R);
        out.reduced.z.resize(R);
        for (Eigen::Index i = 0; i < R; ++i)
        {
            const Eigen::Index j = ds.survivors[static_cast<std::size_t>(i)];
            out.reduced.d(i) = d(j);
            out.reduced.z(i) = zc(j);
            out.reduced_index.push_back(j);
        }
        return out;
    }

    inline DeflationResult deflate(const RankOneMod &mod)
    {
        const double tol = detail::default_tolerance(static_cast<std::size_t>(mod.size()));
        return deflate(mod.d, mod.rho, mod.z, tol, tol);
    }

    // Unitary matrix G (K x K) of all deflation rotations, so that G^H z has zeros at dropped coordinates
    inline Eigen::MatrixXcd rotation_matrix(const DeflationResult &res, Eigen::Index K)
    {
        Eigen::MatrixXcd G = Eigen::MatrixXcd::Identity(K, K);
        for (const auto &g : res.accumulated_rotation)
        {
            Eigen::MatrixXcd step = Eigen::MatrixXcd::Identity(K, K);
            step(g.keep, g.keep) = g.c;
            step(g.drop, g.keep) = g.s;
            step(g.keep, g.drop) = -std::conj(g.s);
            step(g.drop, g.drop) = std::conj(g.c);
            G = G * step;
        }
        return G;
    }

    // k-th root (0-based, descending) of a deflated problem
    inline RootResult root_secular_k(const RankOneMod &mod, Eigen::Index k, std::optional<double> x0 = std::nullopt,
                                     double eps = 1e-9, int max_iter = 100)
    {
        if (k < 0 || k >= mod.size())
            throw InvalidArgument("root_secular_k: index out of range");
        if (!(mod.rho > 0.0))
            throw InvalidArgument("root_secular_k: rho must be positive");
        const auto K = static_cast<std::size_t>(mod.size());
        std::vector<double> d(mod.d.data(), mod.d.data() + K), w(K);
        for (std::size_t j = 0; j < K; ++j)
        {
            w[j] = std::norm(mod.z(static_cast<Eigen::Index>(j)));
            if (w[j] == 0.0 || (j > 0 && !(d[j] < d[j - 1])))
                throw InvalidArgument("root_secular_k: problem is not deflated");
        }
        return detail::solve_secular_root(d, mod.rho, w, static_cast<std::size_t>(k), x0, {eps, max_iter});
    }

    // Reusable solver for a fixed diagonal and varying (rho, z). Sorting happens once; solve()
    // does not allocate after the first call with a given size.
    class RankOneEigensolver
    {
    public:
        RankOneEigensolver() = default;

        explicit RankOneEigensolver(std::span<const double> d, SecularOptions opts = {}) : opts_(opts)
        {
            set_diagonal(d);
        }

        void set_diagonal(std::span<const double> d)
        {
            d_.assign(d.begin(), d.end());
            scratch_.sort_diagonal(d_);
            tol_ = detail::default_tolerance(d_.size());
            warm_.clear();
        }

        void set_options(SecularOptions opts) { opts_ = opts; }
        void set_warm_start(bool on)
        {
            use_warm_ = on;
            warm_.clear();
        }
        void reset_warm() { warm_.clear(); }

        // Enables warm starts and uses `roots` as starting points for the next solve
        void seed_warm(std::span<const double> roots)
        {
            use_warm_ = true;
            warm_.assign(roots.begin(), roots.end());
        }

        std::size_t size() const { return d_.size(); }

        // L largest or smallest eigenvalues of diag(d) - rho z z^H, given w_j = |z_j|^2 in the
        // original order of d. Results are written descending into `out` (size L).
        void solve(double rho, std::span<const double> w, std::size_t L, Which which, std::span<double> out)
        {
            if (!(rho > 0.0) || !std::isfinite(rho))
                throw InvalidArgument("RankOneEigensolver: rho must be positive");
            if (L > d_.size() || out.size() != L || w.size() != d_.size())
                throw InvalidArgument("RankOneEigensolver: size mismatch");

            scratch_.run(d_, rho, w, tol_, tol_);
            const std::size_t R = scratch_.d_red.size();
            candidates_.clear();

            // Requested roots of the reduced problem: top L or bottom L indices
            const std::size_t n_root = std::min(L, R);
            const std::size_t first = which == Which::Largest ? 0 : R - n_root;
            for (std::size_t i = first; i < first + n_root; ++i)
            {
                std::optional<double> x0;
                if (use_warm_)
                {
                    const double hi = scratch_.d_red[i];
                    const double lo = i + 1 < R ? scratch_.d_red[i + 1] : -std::numeric_limits<double>::infinity();
                    for (double v : warm_)
                        if (v > lo && v < hi)
                        {
                            x0 = v;
                            break;
                        }
                }
                const RootResult rr = detail::solve_secular_root(scratch_.d_red, rho, scratch_.w_red, i, x0, opts_);
                candidates_.push_back({rr.root, rr.iterations, R == 1 ? RootOrigin::ClosedForm : RootOrigin::Iterated});
            }
            for (Eigen::Index j : scratch_.deflated)
                candidates_.push_back({d_[static_cast<std::size_t>(j)], 0, RootOrigin::Deflated});

            std::sort(candidates_.begin(), candidates_.end(), [](const Candidate &a, const Candidate &b)
                      { return a.value > b.value; });
            const std::size_t offset = which == Which::Largest ? 0 : candidates_.size() - L;
            last_iter_.resize(L);
            last_origin_.resize(L);
            for (std::size_t i = 0; i < L; ++i)
            {
                out[i] = candidates_[offset + i].value;
                last_iter_[i] = candidates_[offset + i].iterations;
                last_origin_[i] = candidates_[offset + i].origin;
            }
            if (use_warm_)
            {
                warm_.clear();
                for (std::size_t i = 0; i < L; ++i)
                    if (last_origin_[i] == RootOrigin::Iterated)
                        warm_.push_back(out[i]);
            }
        }

        const std::vector<int> &last_iterations() const { return last_iter_; }
        const std::vector<RootOrigin> &last_origin() const { return last_origin_; }

        // Reduced problem of the last solve, for derivative formulas
        std::span<const double> reduced_d() const { return scratch_.d_red; }
        std::span<const double> reduced_w() const { return scratch_.w_red; }
        double spread() const { return scratch_.spread; }

    private:
        struct Candidate
        {
            double value;
            int iterations;
            RootOrigin origin;
        };

        std::vector<double> d_;
        detail::DeflationScratch scratch_;
        std::vector<Candidate> candidates_;
        std::vector<double> warm_;
        std::vector<int> last_iter_;
        std::vector<RootOrigin> last_origin_;
        SecularOptions opts_{};
        double tol_ = 0.0;
        bool use_warm_ = false;
    };

    // L largest/smallest eigenvalues of D - rho z z^H via deflation and secular rooting.
    // Warm-start values are used where they fall inside the corresponding bracket.
    inline SecularRoots eigenvalues(const RankOneMod &mod, std::size_t how_many, Which which = Which::Largest,
                                    const SecularRoots *warm = nullptr, SecularOptions opts = {})
    {
        if (how_many > static_cast<std::size_t>(mod.size()))
            throw InvalidArgument("eigenvalues: more eigenvalues requested than the problem size");
        const auto K = static_cast<std::size_t>(mod.size());
        std::vector<double> d(mod.d.data(), mod.d.data() + K), w(K);
        for (std::size_t j = 0; j < K; ++j)
            w[j] = std::norm(mod.z(static_cast<Eigen::Index>(j)));

        RankOneEigensolver solver(d, opts);
        if (warm)
            solver.seed_warm(warm->roots);
        SecularRoots out;
        out.roots.resize(how_many);
        solver.solve(mod.rho, w, how_many, which, out.roots);
        out.iterations = solver.last_iterations();
        out.origin = solver.last_origin();
        return out;
    }

    // Normalized (D - root I)^-1 z
    inline Eigen::VectorXcd eigenvector_for_root(const RankOneMod &mod, double root)
    {
        Eigen::VectorXcd v(mod.size());
        for (Eigen::Index j = 0; j < mod.size(); ++j)
        {
            const double delta = mod.d(j) - root;
            if (delta == 0.0)
                throw DegenerateEigenvector("eigenvector_for_root: root coincides with a diagonal entry");
            v(j) = mod.z(j) / delta;
        }
        const double n = v.norm();
        if (!(n > 0.0) || !std::isfinite(n))
            throw DegenerateEigenvector("eigenvector_for_root: zero or non-finite vector");
        return v / n;
    }
}

#endif
