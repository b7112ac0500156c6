#include "zv/ops.hpp"

#include <cmath>
#include <numbers>

namespace zv {

namespace {

Tape* common_tape(std::initializer_list<const Tensor*> ts) {
    Tape* t = nullptr;
    for (const Tensor* x : ts) {
        if (!x->defined() || !x->on_tape()) continue;
        if (!t) {
            t = x->tape();
        } else {
            require(t == x->tape(), "operands recorded on different tapes");
        }
    }
    return t;
}

Tensor make_out(Tape* t, std::vector<int> shape, std::vector<float> vals,
                Tape::BackwardFn back) {
    auto d = std::make_shared<TensorData>();
    d->shape = std::move(shape);
    d->values = std::move(vals);
    if (!t) return Tensor(std::move(d), nullptr, -1);
    int node = t->record(d, std::move(back));
    return Tensor(std::move(d), t, node);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    require(a.shape() == b.shape(), "{}: shape mismatch {} vs {}", op, shape_str(a.shape()),
            shape_str(b.shape()));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    size_t n = a.size();
    std::vector<float> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = a.at(static_cast<int>(i)) + b.values()[i];
    Tape* t = common_tape({&a, &b});
    int an = a.node(), bn = b.node();
    return make_out(t, a.shape(), std::move(out),
                    [an, bn](Tape& tp, const std::vector<double>& g) {
                        tp.accumulate(an, g);
                        tp.accumulate(bn, g);
                    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    size_t n = a.size();
    std::vector<float> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = a.values()[i] - b.values()[i];
    Tape* t = common_tape({&a, &b});
    int an = a.node(), bn = b.node();
    return make_out(t, a.shape(), std::move(out),
                    [an, bn, n](Tape& tp, const std::vector<double>& g) {
                        tp.accumulate(an, g);
                        if (bn >= 0) {
                            std::vector<double> nb(n);
                            for (size_t i = 0; i < n; ++i) nb[i] = -g[i];
                            tp.accumulate(bn, nb);
                        }
                    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    size_t n = a.size();
    std::vector<float> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = a.values()[i] * b.values()[i];
    Tape* t = common_tape({&a, &b});
    auto ad = a.data();
    auto bd = b.data();
    int an = a.node(), bn = b.node();
    return make_out(t, a.shape(), std::move(out),
                    [ad, bd, an, bn, n](Tape& tp, const std::vector<double>& g) {
                        if (an >= 0) {
                            std::vector<double> da(n);
                            for (size_t i = 0; i < n; ++i) da[i] = g[i] * bd->values[i];
                            tp.accumulate(an, da);
                        }
                        if (bn >= 0) {
                            std::vector<double> db(n);
                            for (size_t i = 0; i < n; ++i) db[i] = g[i] * ad->values[i];
                            tp.accumulate(bn, db);
                        }
                    });
}

Tensor scale(const Tensor& a, float c) {
    size_t n = a.size();
    std::vector<float> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = a.values()[i] * c;
    Tape* t = common_tape({&a});
    int an = a.node();
    return make_out(t, a.shape(), std::move(out),
                    [an, c, n](Tape& tp, const std::vector<double>& g) {
                        if (an < 0) return;
                        std::vector<double> da(n);
                        for (size_t i = 0; i < n; ++i) da[i] = g[i] * c;
                        tp.accumulate(an, da);
                    });
}

Tensor add_rowvec(const Tensor& a, const Tensor& b) {
    int m = a.rows(), n = a.cols();
    require(static_cast<int>(b.size()) == n, "add_rowvec: {} incompatible with row vector {}",
            shape_str(a.shape()), shape_str(b.shape()));
    std::vector<float> out(a.size());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out[static_cast<size_t>(i) * n + j] = a.at(i, j) + b.at(j);
    Tape* t = common_tape({&a, &b});
    int an = a.node(), bn = b.node();
    return make_out(t, a.shape(), std::move(out),
                    [an, bn, m, n](Tape& tp, const std::vector<double>& g) {
                        tp.accumulate(an, g);
                        if (bn >= 0) {
                            std::vector<double> db(static_cast<size_t>(n));
                            for (int j = 0; j < n; ++j) {
                                double acc = 0.0;
                                for (int i = 0; i < m; ++i) acc += g[static_cast<size_t>(i) * n + j];
                                db[static_cast<size_t>(j)] = acc;
                            }
                            tp.accumulate(bn, db);
                        }
                    });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require(a.shape().size() <= 2 && b.shape().size() <= 2, "matmul expects matrices, got {} and {}",
            shape_str(a.shape()), shape_str(b.shape()));
    int m = a.rows(), k = a.cols(), k2 = b.rows(), n = b.cols();
    require(k == k2, "matmul: inner dimensions differ, {} vs {}", shape_str(a.shape()),
            shape_str(b.shape()));
    std::vector<float> out(static_cast<size_t>(m) * n);
    const auto& av = a.values();
    const auto& bv = b.values();
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p)
                acc += static_cast<double>(av[static_cast<size_t>(i) * k + p]) *
                       static_cast<double>(bv[static_cast<size_t>(p) * n + j]);
            out[static_cast<size_t>(i) * n + j] = static_cast<float>(acc);
        }
    }
    Tape* t = common_tape({&a, &b});
    auto ad = a.data();
    auto bd = b.data();
    int an = a.node(), bn = b.node();
    return make_out(
        t, {m, n}, std::move(out), [ad, bd, an, bn, m, k, n](Tape& tp, const std::vector<double>& g) {
            if (an >= 0) {  // dA = g . B^T
                std::vector<double> da(static_cast<size_t>(m) * k);
                for (int i = 0; i < m; ++i)
                    for (int p = 0; p < k; ++p) {
                        double acc = 0.0;
                        for (int j = 0; j < n; ++j)
                            acc += static_cast<double>(g[static_cast<size_t>(i) * n + j]) *
                                   static_cast<double>(bd->values[static_cast<size_t>(p) * n + j]);
                        da[static_cast<size_t>(i) * k + p] = acc;
                    }
                tp.accumulate(an, da);
            }
            if (bn >= 0) {  // dB = A^T . g
                std::vector<double> db(static_cast<size_t>(k) * n);
                for (int p = 0; p < k; ++p)
                    for (int j = 0; j < n; ++j) {
                        double acc = 0.0;
                        for (int i = 0; i < m; ++i)
                            acc += static_cast<double>(ad->values[static_cast<size_t>(i) * k + p]) *
                                   static_cast<double>(g[static_cast<size_t>(i) * n + j]);
                        db[static_cast<size_t>(p) * n + j] = acc;
                    }
                tp.accumulate(bn, db);
            }
        });
}

Tensor transpose(const Tensor& a) {
    int m = a.rows(), n = a.cols();
    std::vector<float> out(a.size());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            out[static_cast<size_t>(j) * m + i] = a.at(i, j);
    Tape* t = common_tape({&a});
    int an = a.node();
    return make_out(t, {n, m}, std::move(out),
                    [an, m, n](Tape& tp, const std::vector<double>& g) {
                        if (an < 0) return;
                        std::vector<double> da(static_cast<size_t>(m) * n);
                        for (int i = 0; i < m; ++i)
                            for (int j = 0; j < n; ++j)
                                da[static_cast<size_t>(i) * n + j] = g[static_cast<size_t>(j) * m + i];
                        tp.accumulate(an, da);
                    });
}

Tensor slice_rows(const Tensor& a, int start, int count) {
    int m = a.rows(), n = a.cols();
    require(start >= 0 && count >= 1 && start + count <= m,
            "slice_rows: [{}, {}) out of range for {} rows", start, start + count, m);
    std::vector<float> out(static_cast<size_t>(count) * n);
    std::copy(a.values().begin() + static_cast<size_t>(start) * n,
              a.values().begin() + static_cast<size_t>(start + count) * n, out.begin());
    Tape* t = common_tape({&a});
    int an = a.node();
    return make_out(t, {count, n}, std::move(out),
                    [an, start, count, m, n](Tape& tp, const std::vector<double>& g) {
                        if (an < 0) return;
                        std::vector<double> da(static_cast<size_t>(m) * n, 0.0f);
                        std::copy(g.begin(), g.end(), da.begin() + static_cast<size_t>(start) * n);
                        tp.accumulate(an, da);
                        (void)count;
                    });
}

Tensor slice_cols(const Tensor& a, int start, int count) {
    int m = a.rows(), n = a.cols();
    require(start >= 0 && count >= 1 && start + count <= n,
            "slice_cols: [{}, {}) out of range for {} cols", start, start + count, n);
    std::vector<float> out(static_cast<size_t>(m) * count);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < count; ++j)
            out[static_cast<size_t>(i) * count + j] = a.at(i, start + j);
    Tape* t = common_tape({&a});
    int an = a.node();
    return make_out(t, {m, count}, std::move(out),
                    [an, start, count, m, n](Tape& tp, const std::vector<double>& g) {
                        if (an < 0) return;
                        std::vector<double> da(static_cast<size_t>(m) * n, 0.0f);
                        for (int i = 0; i < m; ++i)
                            for (int j = 0; j < count; ++j)
                                da[static_cast<size_t>(i) * n + start + j] =
                                    g[static_cast<size_t>(i) * count + j];
                        tp.accumulate(an, da);
                    });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
    require(!parts.empty(), "concat_rows: no parts");
    int n = parts[0].cols();
    int total = 0;
    for (const auto& p : parts) {
        require(p.cols() == n, "concat_rows: column mismatch {} vs {}", p.cols(), n);
        total += p.rows();
    }
    std::vector<float> out;
    out.reserve(static_cast<size_t>(total) * n);
    for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());

    std::vector<const Tensor*> ptrs;
    for (const auto& p : parts) ptrs.push_back(&p);
    Tape* t = nullptr;
    for (const auto& p : parts)
        if (p.on_tape()) {
            require(!t || t == p.tape(), "operands recorded on different tapes");
            t = p.tape();
        }
    std::vector<int> nodes;
    std::vector<size_t> sizes;
    for (const auto& p : parts) {
        nodes.push_back(p.node());
        sizes.push_back(p.size());
    }
    return make_out(t, {total, n}, std::move(out),
                    [nodes, sizes](Tape& tp, const std::vector<double>& g) {
                        size_t off = 0;
                        for (size_t i = 0; i < nodes.size(); ++i) {
                            if (nodes[i] >= 0) tp.accumulate(nodes[i], g.data() + off, sizes[i]);
                            off += sizes[i];
                        }
                    });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    require(!parts.empty(), "concat_cols: no parts");
    int m = parts[0].rows();
    int total = 0;
    for (const auto& p : parts) {
        require(p.rows() == m, "concat_cols: row mismatch {} vs {}", p.rows(), m);
        total += p.cols();
    }
    std::vector<float> out(static_cast<size_t>(m) * total);
    int off = 0;
    for (const auto& p : parts) {
        int c = p.cols();
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < c; ++j)
                out[static_cast<size_t>(i) * total + off + j] = p.at(i, j);
        off += c;
    }
    Tape* t = nullptr;
    for (const auto& p : parts)
        if (p.on_tape()) {
            require(!t || t == p.tape(), "operands recorded on different tapes");
            t = p.tape();
        }
    std::vector<int> nodes;
    std::vector<int> widths;
    for (const auto& p : parts) {
        nodes.push_back(p.node());
        widths.push_back(p.cols());
    }
    return make_out(t, {m, total}, std::move(out),
                    [nodes, widths, m, total](Tape& tp, const std::vector<double>& g) {
                        int off2 = 0;
                        for (size_t i = 0; i < nodes.size(); ++i) {
                            int c = widths[i];
                            if (nodes[i] >= 0) {
                                std::vector<double> dp(static_cast<size_t>(m) * c);
                                for (int r = 0; r < m; ++r)
                                    for (int j = 0; j < c; ++j)
                                        dp[static_cast<size_t>(r) * c + j] =
                                            g[static_cast<size_t>(r) * total + off2 + j];
                                tp.accumulate(nodes[i], dp);
                            }
                            off2 += c;
                        }
                    });
}

namespace {
Tensor softmax_rows_impl(const Tensor& x, const BoolMat* mask) {
    int m = x.rows(), n = x.cols();
    if (mask) {
        require(mask->rows == m && mask->cols == n, "softmax mask {}x{} does not match {}",
                mask->rows, mask->cols, shape_str(x.shape()));
    }
    std::vector<float> out(x.size(), 0.0f);
    for (int i = 0; i < m; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        int allowed = 0;
        for (int j = 0; j < n; ++j) {
            if (mask && !mask->at(i, j)) continue;
            ++allowed;
            mx = std::max(mx, static_cast<double>(x.at(i, j)));
        }
        require(allowed > 0, "softmax_rows: row {} is fully masked (degenerate row)", i);
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            if (mask && !mask->at(i, j)) continue;
            sum += std::exp(static_cast<double>(x.at(i, j)) - mx);
        }
        for (int j = 0; j < n; ++j) {
            if (mask && !mask->at(i, j)) continue;
            out[static_cast<size_t>(i) * n + j] =
                static_cast<float>(std::exp(static_cast<double>(x.at(i, j)) - mx) / sum);
        }
    }
    Tape* t = common_tape({&x});
    int xn = x.node();
    auto out_copy = out;  // captured probabilities for the backward rule
    return make_out(t, x.shape(), std::move(out),
                    [xn, out_copy, m, n](Tape& tp, const std::vector<double>& g) {
                        if (xn < 0) return;
                        std::vector<double> dx(static_cast<size_t>(m) * n);
                        for (int i = 0; i < m; ++i) {
                            double dot = 0.0;
                            for (int j = 0; j < n; ++j)
                                dot += static_cast<double>(g[static_cast<size_t>(i) * n + j]) *
                                       static_cast<double>(out_copy[static_cast<size_t>(i) * n + j]);
                            for (int j = 0; j < n; ++j) {
                                size_t idx = static_cast<size_t>(i) * n + j;
                                dx[idx] = static_cast<double>(out_copy[idx]) *
                                          (g[idx] - dot);
                            }
                        }
                        tp.accumulate(xn, dx);
                    });
}
}  // namespace

Tensor softmax_rows(const Tensor& x) { return softmax_rows_impl(x, nullptr); }
Tensor softmax_rows(const Tensor& x, const BoolMat& mask) { return softmax_rows_impl(x, &mask); }

Tensor layernorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, float eps) {
    int m = x.rows(), d = x.cols();
    require(d >= 1, "layernorm: feature dimension must be >= 1");
    require(static_cast<int>(gamma.size()) == d && static_cast<int>(beta.size()) == d,
            "layernorm: gamma {} / beta {} do not match feature dim {}",
            shape_str(gamma.shape()), shape_str(beta.shape()), d);
    std::vector<float> out(x.size());
    std::vector<float> xhat(x.size());
    std::vector<float> inv_sigma(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        double mu = 0.0;
        for (int j = 0; j < d; ++j) mu += x.at(i, j);
        mu /= d;
        double var = 0.0;
        for (int j = 0; j < d; ++j) {
            double c = x.at(i, j) - mu;
            var += c * c;
        }
        var /= d;
        double inv = 1.0 / std::sqrt(var + static_cast<double>(eps));
        inv_sigma[static_cast<size_t>(i)] = static_cast<float>(inv);
        for (int j = 0; j < d; ++j) {
            double xh = (x.at(i, j) - mu) * inv;
            xhat[static_cast<size_t>(i) * d + j] = static_cast<float>(xh);
            out[static_cast<size_t>(i) * d + j] =
                static_cast<float>(xh * gamma.at(j) + beta.at(j));
        }
    }
    Tape* t = common_tape({&x, &gamma, &beta});
    auto gd = gamma.data();
    int xn = x.node(), gn = gamma.node(), bn = beta.node();
    return make_out(
        t, x.shape(), std::move(out),
        [xn, gn, bn, gd, xhat, inv_sigma, m, d](Tape& tp, const std::vector<double>& g) {
            if (gn >= 0) {
                std::vector<double> dg(static_cast<size_t>(d));
                for (int j = 0; j < d; ++j) {
                    double acc = 0.0;
                    for (int i = 0; i < m; ++i)
                        acc += static_cast<double>(g[static_cast<size_t>(i) * d + j]) *
                               static_cast<double>(xhat[static_cast<size_t>(i) * d + j]);
                    dg[static_cast<size_t>(j)] = acc;
                }
                tp.accumulate(gn, dg);
            }
            if (bn >= 0) {
                std::vector<double> db(static_cast<size_t>(d));
                for (int j = 0; j < d; ++j) {
                    double acc = 0.0;
                    for (int i = 0; i < m; ++i) acc += g[static_cast<size_t>(i) * d + j];
                    db[static_cast<size_t>(j)] = acc;
                }
                tp.accumulate(bn, db);
            }
            if (xn >= 0) {
                std::vector<double> dx(static_cast<size_t>(m) * d);
                for (int i = 0; i < m; ++i) {
                    double mean_dy = 0.0, mean_dy_xhat = 0.0;
                    for (int j = 0; j < d; ++j) {
                        size_t idx = static_cast<size_t>(i) * d + j;
                        double dy = static_cast<double>(g[idx]) * gd->values[static_cast<size_t>(j)];
                        mean_dy += dy;
                        mean_dy_xhat += dy * xhat[idx];
                    }
                    mean_dy /= d;
                    mean_dy_xhat /= d;
                    for (int j = 0; j < d; ++j) {
                        size_t idx = static_cast<size_t>(i) * d + j;
                        double dy = static_cast<double>(g[idx]) * gd->values[static_cast<size_t>(j)];
                        dx[idx] = (dy - mean_dy - xhat[idx] * mean_dy_xhat) *
                                  inv_sigma[static_cast<size_t>(i)];
                    }
                }
                tp.accumulate(xn, dx);
            }
        });
}

Tensor gelu(const Tensor& x) {
    size_t n = x.size();
    std::vector<float> out(n);
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    for (size_t i = 0; i < n; ++i) {
        double v = x.values()[i];
        out[i] = static_cast<float>(0.5 * v * (1.0 + std::erf(v * inv_sqrt2)));
    }
    Tape* t = common_tape({&x});
    auto xd = x.data();
    int xn = x.node();
    return make_out(t, x.shape(), std::move(out),
                    [xn, xd, n, inv_sqrt2](Tape& tp, const std::vector<double>& g) {
                        if (xn < 0) return;
                        const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
                        std::vector<double> dx(n);
                        for (size_t i = 0; i < n; ++i) {
                            double v = xd->values[i];
                            double cdf = 0.5 * (1.0 + std::erf(v * inv_sqrt2));
                            double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
                            dx[i] = g[i] * (cdf + v * pdf);
                        }
                        tp.accumulate(xn, dx);
                    });
}

Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets, int ignore_index) {
    int n = logits.rows(), v = logits.cols();
    require(static_cast<int>(targets.size()) == n,
            "cross_entropy: {} targets for {} logit rows", targets.size(), n);
    int kept = 0;
    for (int i = 0; i < n; ++i) {
        if (targets[static_cast<size_t>(i)] == ignore_index) continue;
        require(targets[static_cast<size_t>(i)] >= 0 && targets[static_cast<size_t>(i)] < v,
                "cross_entropy: target {} at row {} outside vocab [0, {})",
                targets[static_cast<size_t>(i)], i, v);
        ++kept;
    }
    require(kept > 0, "cross_entropy: empty loss, all {} positions ignored", n);

    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        int tgt = targets[static_cast<size_t>(i)];
        if (tgt == ignore_index) continue;
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < v; ++j) mx = std::max(mx, static_cast<double>(logits.at(i, j)));
        double sum = 0.0;
        for (int j = 0; j < v; ++j) sum += std::exp(static_cast<double>(logits.at(i, j)) - mx);
        total += mx + std::log(sum) - static_cast<double>(logits.at(i, tgt));
    }
    total = std::max(0.0, total / kept);

    Tape* t = common_tape({&logits});
    auto ld = logits.data();
    int ln = logits.node();
    return make_out(t, {1}, {static_cast<float>(total)},
                    [ln, ld, targets, ignore_index, n, v, kept](Tape& tp,
                                                                const std::vector<double>& g) {
                        if (ln < 0) return;
                        double gs = static_cast<double>(g[0]) / kept;
                        std::vector<double> dl(static_cast<size_t>(n) * v, 0.0f);
                        for (int i = 0; i < n; ++i) {
                            int tgt = targets[static_cast<size_t>(i)];
                            if (tgt == ignore_index) continue;
                            double mx = -std::numeric_limits<double>::infinity();
                            for (int j = 0; j < v; ++j)
                                mx = std::max(mx,
                                              static_cast<double>(ld->values[static_cast<size_t>(i) * v + j]));
                            double sum = 0.0;
                            for (int j = 0; j < v; ++j)
                                sum += std::exp(
                                    static_cast<double>(ld->values[static_cast<size_t>(i) * v + j]) - mx);
                            for (int j = 0; j < v; ++j) {
                                double p = std::exp(static_cast<double>(
                                               ld->values[static_cast<size_t>(i) * v + j]) - mx) /
                                           sum;
                                double delta = (j == tgt) ? 1.0 : 0.0;
                                dl[static_cast<size_t>(i) * v + j] = (p - delta) * gs;
                            }
                        }
                        tp.accumulate(ln, dl);
                    });
}

Tensor embed(const Tensor& table, const std::vector<int>& ids) {
    int vsz = table.rows(), d = table.cols();
    require(!ids.empty(), "embed: empty id list");
    for (size_t i = 0; i < ids.size(); ++i)
        require(ids[i] >= 0 && ids[i] < vsz, "embed: unknown token id {} at position {} (vocab {})",
                ids[i], i, vsz);
    std::vector<float> out(ids.size() * static_cast<size_t>(d));
    for (size_t i = 0; i < ids.size(); ++i)
        std::copy(table.values().begin() + static_cast<size_t>(ids[i]) * d,
                  table.values().begin() + static_cast<size_t>(ids[i] + 1) * d,
                  out.begin() + i * static_cast<size_t>(d));
    Tape* t = common_tape({&table});
    int tn = table.node();
    return make_out(t, {static_cast<int>(ids.size()), d}, std::move(out),
                    [tn, ids, vsz, d](Tape& tp, const std::vector<double>& g) {
                        if (tn < 0) return;
                        std::vector<double> dt(static_cast<size_t>(vsz) * d, 0.0f);
                        for (size_t i = 0; i < ids.size(); ++i)
                            for (int j = 0; j < d; ++j)
                                dt[static_cast<size_t>(ids[i]) * d + j] +=
                                    g[i * static_cast<size_t>(d) + j];
                        tp.accumulate(tn, dt);
                    });
}

Tensor mean_rows(const Tensor& x) {
    int m = x.rows(), n = x.cols();
    std::vector<float> out(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i) acc += x.at(i, j);
        out[static_cast<size_t>(j)] = static_cast<float>(acc / m);
    }
    Tape* t = common_tape({&x});
    int xn = x.node();
    return make_out(t, {1, n}, std::move(out),
                    [xn, m, n](Tape& tp, const std::vector<double>& g) {
                        if (xn < 0) return;
                        std::vector<double> dx(static_cast<size_t>(m) * n);
                        for (int i = 0; i < m; ++i)
                            for (int j = 0; j < n; ++j)
                                dx[static_cast<size_t>(i) * n + j] = g[static_cast<size_t>(j)] / m;
                        tp.accumulate(xn, dx);
                    });
}

Tensor max_over_rows(const Tensor& x) {
    int m = x.rows(), n = x.cols();
    std::vector<float> out(static_cast<size_t>(n));
    std::vector<int> arg(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        int best = 0;
        float bv = x.at(0, j);
        for (int i = 1; i < m; ++i) {
            if (x.at(i, j) > bv) {  // ties keep the lower index
                bv = x.at(i, j);
                best = i;
            }
        }
        out[static_cast<size_t>(j)] = bv;
        arg[static_cast<size_t>(j)] = best;
    }
    Tape* t = common_tape({&x});
    int xn = x.node();
    return make_out(t, {1, n}, std::move(out),
                    [xn, arg, m, n](Tape& tp, const std::vector<double>& g) {
                        if (xn < 0) return;
                        std::vector<double> dx(static_cast<size_t>(m) * n, 0.0f);
                        for (int j = 0; j < n; ++j)
                            dx[static_cast<size_t>(arg[static_cast<size_t>(j)]) * n + j] =
                                g[static_cast<size_t>(j)];
                        tp.accumulate(xn, dx);
                    });
}

Tensor l2_normalize_rows(const Tensor& x) {
    int m = x.rows(), n = x.cols();
    std::vector<float> out(x.size());
    std::vector<double> inv_norm(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j)
            acc += static_cast<double>(x.at(i, j)) * static_cast<double>(x.at(i, j));
        double nm = std::sqrt(acc);
        require(nm > 0.0, "l2_normalize_rows: row {} has zero norm, cannot normalize", i);
        inv_norm[static_cast<size_t>(i)] = 1.0 / nm;
        for (int j = 0; j < n; ++j)
            out[static_cast<size_t>(i) * n + j] = static_cast<float>(x.at(i, j) / nm);
    }
    Tape* t = common_tape({&x});
    int xn = x.node();
    auto yv = out;
    return make_out(t, x.shape(), std::move(out),
                    [xn, yv, inv_norm, m, n](Tape& tp, const std::vector<double>& g) {
                        if (xn < 0) return;
                        std::vector<double> dx(static_cast<size_t>(m) * n);
                        for (int i = 0; i < m; ++i) {
                            double dot = 0.0;
                            for (int j = 0; j < n; ++j) {
                                size_t idx = static_cast<size_t>(i) * n + j;
                                dot += static_cast<double>(g[idx]) * static_cast<double>(yv[idx]);
                            }
                            for (int j = 0; j < n; ++j) {
                                size_t idx = static_cast<size_t>(i) * n + j;
                                dx[idx] = (g[idx] - static_cast<double>(yv[idx]) * dot) *
                                          inv_norm[static_cast<size_t>(i)];
                            }
                        }
                        tp.accumulate(xn, dx);
                    });
}

Tensor div_by_scalar(const Tensor& x, const Tensor& s) {
    require(s.size() == 1, "div_by_scalar: divisor must be a single element, got {}",
            shape_str(s.shape()));
    double sv = s.at(0);
    require(sv != 0.0, "div_by_scalar: division by zero");
    size_t n = x.size();
    std::vector<float> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = static_cast<float>(x.values()[i] / sv);
    Tape* t = common_tape({&x, &s});
    auto xd = x.data();
    int xn = x.node(), sn = s.node();
    return make_out(t, x.shape(), std::move(out),
                    [xn, sn, xd, sv, n](Tape& tp, const std::vector<double>& g) {
                        if (xn >= 0) {
                            std::vector<double> dx(n);
                            for (size_t i = 0; i < n; ++i) dx[i] = g[i] / sv;
                            tp.accumulate(xn, dx);
                        }
                        if (sn >= 0) {
                            double acc = 0.0;
                            for (size_t i = 0; i < n; ++i)
                                acc += static_cast<double>(g[i]) *
                                       (-static_cast<double>(xd->values[i]) / (sv * sv));
                            tp.accumulate(sn, &acc, 1);
                        }
                    });
}

Tensor sum_all(const Tensor& x) {
    double acc = 0.0;
    for (float v : x.values()) acc += v;
    Tape* t = common_tape({&x});
    int xn = x.node();
    size_t n = x.size();
    return make_out(t, {1}, {static_cast<float>(acc)},
                    [xn, n](Tape& tp, const std::vector<double>& g) {
                        if (xn < 0) return;
                        std::vector<double> dx(n, g[0]);
                        tp.accumulate(xn, dx);
                    });
}

Tensor mean_all(const Tensor& x) {
    double acc = 0.0;
    for (float v : x.values()) acc += v;
    size_t n = x.size();
    Tape* t = common_tape({&x});
    int xn = x.node();
    return make_out(t, {1}, {static_cast<float>(acc / static_cast<double>(n))},
                    [xn, n](Tape& tp, const std::vector<double>& g) {
                        if (xn < 0) return;
                        std::vector<double> dx(n, g[0] / static_cast<double>(n));
                        tp.accumulate(xn, dx);
                    });
}

Tensor dropout(const Tensor& x, float rate, Rng& rng) {
    require(rate >= 0.0f && rate < 1.0f, "dropout: rate {} outside [0, 1)", rate);
    if (rate == 0.0f) return x;
    size_t n = x.size();
    std::vector<uint8_t> keep(n);
    float inv_keep = 1.0f / (1.0f - rate);
    std::vector<float> out(n);
    for (size_t i = 0; i < n; ++i) {
        keep[i] = rng.uniform() >= rate ? 1 : 0;
        out[i] = keep[i] ? x.values()[i] * inv_keep : 0.0f;
    }
    Tape* t = common_tape({&x});
    int xn = x.node();
    return make_out(t, x.shape(), std::move(out),
                    [xn, keep, inv_keep, n](Tape& tp, const std::vector<double>& g) {
                        if (xn < 0) return;
                        std::vector<double> dx(n);
                        for (size_t i = 0; i < n; ++i) dx[i] = keep[i] ? g[i] * inv_keep : 0.0;
                        tp.accumulate(xn, dx);
                    });
}

}  // namespace zv
