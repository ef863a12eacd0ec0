#include "tsa/matfac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tsa/errors.hpp"

namespace tsa {

namespace {

void add(FlopCounter* f, long long FlopCounter::*field, long long n) {
    if (f) f->*field += n;
}

// inverse of a 2x2 symmetric [[a, b], [b, c]] applied to (x, y)
inline void solve2(double a, double b, double c, double x, double y, double& ox, double& oy) {
    double det = a * c - b * b;
    ox = (c * x - b * y) / det;
    oy = (a * y - b * x) / det;
}

double max_abs(const Mat& L) {
    double m = 0.0;
    for (Eigen::Index j = 0; j < L.cols(); ++j)
        for (Eigen::Index i = j + 1; i < L.rows(); ++i) m = std::max(m, std::abs(L(i, j)));
    return std::max(m, 1.0);
}

}  // namespace

LBLFactors LBLFactors::identity(int p) {
    LBLFactors f;
    f.perm.resize(p);
    for (int i = 0; i < p; ++i) f.perm[i] = i;
    f.L = Mat::Identity(p, p);
    f.blocks.reserve(p);
    for (int i = 0; i < p; ++i) f.blocks.push_back({i, 1, 1.0, 0.0, 0.0});
    return f;
}

LBLFactors factorize(const Mat& A, FlopCounter* flops) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n) throw NotSymmetric("factorize: matrix must be square");
    double scale = A.cwiseAbs().maxCoeff();
    if (!A.allFinite()) throw NotSymmetric("factorize: non-finite entries");
    if ((A - A.transpose()).norm() > 1e-9 * std::max(A.norm(), std::numeric_limits<double>::min()))
        throw NotSymmetric("factorize: matrix is not symmetric");

    Mat S = 0.5 * (A + A.transpose());
    LBLFactors f;
    f.perm.resize(n);
    for (int i = 0; i < n; ++i) f.perm[i] = i;
    f.L = Mat::Identity(n, n);

    auto swap_sym = [&](int i, int j, int k) {
        if (i == j) return;
        S.row(i).swap(S.row(j));
        S.col(i).swap(S.col(j));
        std::swap(f.perm[i], f.perm[j]);
        if (k > 0) f.L.block(i, 0, 1, k).swap(f.L.block(j, 0, 1, k));
    };

    int k = 0;
    while (k < n) {
        const int m = n - k;
        double mu0 = 0.0, mu1 = 0.0;
        int r0 = k, c0 = k, d1 = k;
        for (int j = k; j < n; ++j) {
            double dj = std::abs(S(j, j));
            if (dj > mu1) {
                mu1 = dj;
                d1 = j;
            }
            for (int i = j; i < n; ++i) {
                double v = std::abs(S(i, j));
                if (v > mu0) {
                    mu0 = v;
                    r0 = i;
                    c0 = j;
                }
            }
        }
        add(flops, &FlopCounter::factorize, static_cast<long long>(m) * m / 2);

        if (mu0 <= 1e-300 * std::max(scale, 1.0) || mu0 == 0.0) {
            // remaining block is zero: record zero pivots
            for (int j = k; j < n; ++j) f.blocks.push_back({j, 1, 0.0, 0.0, 0.0});
            break;
        }

        if (mu1 >= kBunchAlpha * mu0) {
            swap_sym(k, d1, k);
            double piv = S(k, k);
            for (int i = k + 1; i < n; ++i) f.L(i, k) = S(i, k) / piv;
            for (int j = k + 1; j < n; ++j) {
                double ljs = S(j, k);
                for (int i = j; i < n; ++i) S(i, j) -= f.L(i, k) * ljs;
            }
            for (int j = k + 1; j < n; ++j)
                for (int i = j + 1; i < n; ++i) S(j, i) = S(i, j);
            f.blocks.push_back({k, 1, piv, 0.0, 0.0});
            add(flops, &FlopCounter::factorize, static_cast<long long>(m) * m);
            k += 1;
        } else {
            int lo = std::min(r0, c0), hi = std::max(r0, c0);
            swap_sym(k, lo, k);
            swap_sym(k + 1, hi, k);
            double a = S(k, k), b = S(k + 1, k), c = S(k + 1, k + 1);
            for (int i = k + 2; i < n; ++i) {
                double x, y;
                solve2(a, b, c, S(i, k), S(i, k + 1), x, y);
                f.L(i, k) = x;
                f.L(i, k + 1) = y;
            }
            for (int j = k + 2; j < n; ++j) {
                double s0 = S(j, k), s1 = S(j, k + 1);
                for (int i = j; i < n; ++i) S(i, j) -= f.L(i, k) * s0 + f.L(i, k + 1) * s1;
            }
            for (int j = k + 2; j < n; ++j)
                for (int i = j + 1; i < n; ++i) S(j, i) = S(i, j);
            f.blocks.push_back({k, 2, a, b, c});
            add(flops, &FlopCounter::factorize, 2LL * m * m);
            k += 2;
        }
    }
    f.max_abs_l = max_abs(f.L);
    return f;
}

Vec forward_permuted(const LBLFactors& f, const Vec& z, FlopCounter* flops) {
    const int n = f.n();
    Vec w(n);
    for (int i = 0; i < n; ++i) w[i] = z[f.perm[i]];
    for (int j = 0; j < n; ++j) {
        double wj = w[j];
        if (wj != 0.0) w.tail(n - j - 1).noalias() -= f.L.col(j).tail(n - j - 1) * wj;
    }
    add(flops, &FlopCounter::update, static_cast<long long>(n) * n);
    return w;
}

namespace {

struct Pivot {
    int start, size;
    double a, b, c;   // updated pivot block in the current basis
    double g0, g1;    // gamma
    bool merged;      // two former 1x1 columns joined into a 2x2 pivot
};

}  // namespace

LBLFactors rank_one_update(const LBLFactors& f, double sigma, const Vec& z, const UpdateOptions& opt,
                           FlopCounter* flops) {
    const int n = f.n();
    if (z.size() != n) throw DomainViolation("rank_one_update: dimension mismatch");
    LBLFactors out;
    out.perm = f.perm;
    out.L = f.L;
    if (sigma == 0.0 || z.squaredNorm() == 0.0) {
        out.blocks = f.blocks;
        out.max_abs_l = f.max_abs_l;
        return out;
    }

    Vec w = forward_permuted(f, z, flops);
    std::vector<double> suf(n + 1, 0.0);
    for (int i = n - 1; i >= 0; --i) suf[i] = std::max(suf[i + 1], std::abs(w[i]));

    std::vector<Pivot> piv;
    piv.reserve(f.blocks.size());
    double s = sigma;
    const std::size_t nb = f.blocks.size();
    std::size_t u = 0;
    const double inf = std::numeric_limits<double>::infinity();
    while (u < nb) {
        const Block& blk = f.blocks[u];
        const int st = blk.start;
        if (blk.size == 1) {
            double wj = w[st];
            double d = blk.a + s * wj * wj;
            double scl = std::max(std::abs(blk.a), std::abs(s) * wj * wj);
            bool ok1 = std::abs(d) > opt.pivot_tol * scl && d != 0.0;
            double g = ok1 ? s * wj / d : 0.0;
            double m1 = ok1 ? std::abs(g) * suf[st + 1] : inf;

            bool took = false;
            if (m1 > kEntryBound && u + 1 < nb && f.blocks[u + 1].size == 1) {
                const Block& nx = f.blocks[u + 1];
                double w0 = wj, w1 = w[st + 1];
                double a = blk.a + s * w0 * w0, b = s * w0 * w1, c = nx.a + s * w1 * w1;
                double det = a * c - b * b;
                double dsc = std::max({std::abs(a * c), b * b, 1e-300});
                if (std::abs(det) > opt.pivot_tol * dsc) {
                    double g0, g1;
                    solve2(a, b, c, s * w0, s * w1, g0, g1);
                    double m2 = std::max(std::abs(g0), std::abs(g1)) * suf[st + 2];
                    if (m2 < m1) {
                        piv.push_back({st, 2, a, b, c, g0, g1, true});
                        s -= s * (w0 * g0 + w1 * g1);
                        u += 2;
                        took = true;
                    }
                }
            }
            if (!took) {
                if (!ok1) throw UpdateBreakdown("rank_one_update: pivot collapse");
                piv.push_back({st, 1, d, 0.0, 0.0, g, 0.0, false});
                s -= s * wj * g;
                u += 1;
            }
        } else {
            double w0 = w[st], w1 = w[st + 1];
            double a = blk.a + s * w0 * w0, b = blk.b + s * w0 * w1, c = blk.c + s * w1 * w1;
            double det = a * c - b * b;
            double dsc = std::max({std::abs(a * c), b * b, 1e-300});
            if (!(std::abs(det) > opt.pivot_tol * dsc)) throw UpdateBreakdown("rank_one_update: 2x2 pivot collapse");
            double g0, g1;
            solve2(a, b, c, s * w0, s * w1, g0, g1);
            piv.push_back({st, 2, a, b, c, g0, g1, false});
            s -= s * (w0 * g0 + w1 * g1);
            u += 1;
        }
        add(flops, &FlopCounter::update, 12);
    }

    // L' = L * Ltilde; column block J gains acc * gamma^T where acc is the
    // sum of the original trailing columns weighted by w
    Vec acc = Vec::Zero(n);
    out.blocks.resize(piv.size());
    for (std::size_t r = piv.size(); r-- > 0;) {
        const Pivot& pv = piv[r];
        const int st = pv.start;
        if (pv.size == 1) {
            Vec col = f.L.col(st);
            out.L.col(st) = col + acc * pv.g0;
            acc += col * w[st];
            out.blocks[r] = {st, 1, pv.a, 0.0, 0.0};
            add(flops, &FlopCounter::update, 4LL * n);
        } else {
            Vec c0 = f.L.col(st), c1 = f.L.col(st + 1);
            Vec n0 = c0 + acc * pv.g0;
            Vec n1 = c1 + acc * pv.g1;
            acc += c0 * w[st] + c1 * w[st + 1];
            double a = pv.a, b = pv.b, c = pv.c;
            if (pv.merged) {
                // restore an identity diagonal block: M = [[1,0],[l,1]]
                double l = f.L(st + 1, st);
                // B <- M B M^T
                double na = a, nb2 = b + l * a, nc = c + 2.0 * l * b + l * l * a;
                a = na;
                b = nb2;
                c = nc;
                // columns <- columns * M^{-1}, M^{-1} = [[1,0],[-l,1]]
                n0 -= l * n1;
            }
            out.L.col(st) = n0;
            out.L.col(st + 1) = n1;
            out.L(st, st) = 1.0;
            out.L(st + 1, st) = 0.0;
            out.L(st + 1, st + 1) = 1.0;
            out.blocks[r] = {st, 2, a, b, c};
            add(flops, &FlopCounter::update, 10LL * n);
        }
    }

    out.max_abs_l = max_abs(out.L);
    add(flops, &FlopCounter::update, static_cast<long long>(n) * n / 2);
    if (!std::isfinite(out.max_abs_l) || out.max_abs_l > opt.growth_limit)
        throw UpdateBreakdown("rank_one_update: element growth beyond limit");
    if (opt.enforce_entry_bound && !out.entry_bound_ok())
        throw UpdateBreakdown("rank_one_update: entry bound exceeded");
    return out;
}

void scale_blocks(LBLFactors& f, double t) {
    for (auto& b : f.blocks) {
        b.a *= t;
        b.b *= t;
        b.c *= t;
    }
}

BlockEigen block_eigen(const std::vector<Block>& blocks, int n) {
    BlockEigen e;
    e.lambda.resize(n);
    e.cs.reserve(blocks.size());
    e.sn.reserve(blocks.size());
    for (const auto& b : blocks) {
        if (b.size == 1) {
            e.lambda[b.start] = b.a;
            e.cs.push_back(1.0);
            e.sn.push_back(0.0);
            continue;
        }
        double cs = 1.0, sn = 0.0;
        if (b.b != 0.0) {
            double th = 0.5 * std::atan2(2.0 * b.b, b.a - b.c);
            cs = std::cos(th);
            sn = std::sin(th);
        }
        e.lambda[b.start] = b.a * cs * cs + 2.0 * b.b * cs * sn + b.c * sn * sn;
        e.lambda[b.start + 1] = b.a * sn * sn - 2.0 * b.b * cs * sn + b.c * cs * cs;
        e.cs.push_back(cs);
        e.sn.push_back(sn);
    }
    return e;
}

Inertia inertia_of(const Vec& lambda, double rel_tol) {
    Inertia in;
    double m = lambda.size() ? lambda.cwiseAbs().maxCoeff() : 0.0;
    double tol = rel_tol * m;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda[i] > tol)
            ++in.pos;
        else if (lambda[i] < -tol)
            ++in.neg;
        else
            ++in.zero;
    }
    return in;
}

Inertia inertia_of(const LBLFactors& f) { return inertia_of(block_eigen(f.blocks, f.n()).lambda); }

Vec solve(const LBLFactors& f, const BlockEigen& eig, const Vec& rhs, FlopCounter* flops) {
    const int n = f.n();
    if ((eig.lambda.array() <= 0.0).any()) throw DomainViolation("solve: modified eigenvalues must be positive");
    Vec z(n);
    for (int i = 0; i < n; ++i) z[i] = rhs[f.perm[i]];
    for (int j = 0; j < n; ++j) {
        double zj = z[j];
        if (zj != 0.0) z.tail(n - j - 1).noalias() -= f.L.col(j).tail(n - j - 1) * zj;
    }
    for (std::size_t bi = 0; bi < f.blocks.size(); ++bi) {
        const Block& b = f.blocks[bi];
        if (b.size == 1) {
            z[b.start] /= eig.lambda[b.start];
        } else {
            double cs = eig.cs[bi], sn = eig.sn[bi];
            double x = z[b.start], y = z[b.start + 1];
            // Q^T z, scale, Q
            double q0 = (cs * x + sn * y) / eig.lambda[b.start];
            double q1 = (-sn * x + cs * y) / eig.lambda[b.start + 1];
            z[b.start] = cs * q0 - sn * q1;
            z[b.start + 1] = sn * q0 + cs * q1;
        }
    }
    for (int j = n - 1; j >= 0; --j) z[j] -= f.L.col(j).tail(n - j - 1).dot(z.tail(n - j - 1));
    Vec d(n);
    for (int i = 0; i < n; ++i) d[f.perm[i]] = z[i];
    add(flops, &FlopCounter::solve, 2LL * n * n + 8LL * n);
    return d;
}

Vec apply(const LBLFactors& f, const Vec& x, FlopCounter* flops) {
    const int n = f.n();
    Vec y(n);
    for (int i = 0; i < n; ++i) y[i] = x[f.perm[i]];
    // y <- L^T y
    for (int j = 0; j < n; ++j) y[j] += f.L.col(j).tail(n - j - 1).dot(y.tail(n - j - 1));
    for (const auto& b : f.blocks) {
        if (b.size == 1) {
            y[b.start] *= b.a;
        } else {
            double u0 = y[b.start], u1 = y[b.start + 1];
            y[b.start] = b.a * u0 + b.b * u1;
            y[b.start + 1] = b.b * u0 + b.c * u1;
        }
    }
    // y <- L y, last column first so inputs are still untouched
    for (int j = n - 1; j >= 0; --j) {
        double yj = y[j];
        if (yj != 0.0) y.tail(n - j - 1).noalias() += f.L.col(j).tail(n - j - 1) * yj;
    }
    Vec out(n);
    for (int i = 0; i < n; ++i) out[f.perm[i]] = y[i];
    add(flops, &FlopCounter::update, 2LL * n * n);
    return out;
}

Mat block_matrix(const std::vector<Block>& blocks, int n) {
    Mat B = Mat::Zero(n, n);
    for (const auto& b : blocks) {
        B(b.start, b.start) = b.a;
        if (b.size == 2) {
            B(b.start + 1, b.start) = B(b.start, b.start + 1) = b.b;
            B(b.start + 1, b.start + 1) = b.c;
        }
    }
    return B;
}

Mat reconstruct(const LBLFactors& f) {
    const int n = f.n();
    Mat M = f.L * block_matrix(f.blocks, n) * f.L.transpose();
    Mat A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(f.perm[i], f.perm[j]) = M(i, j);
    return A;
}

}  // namespace tsa
