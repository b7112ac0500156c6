#pragma once

// Double-precision reference implementations used as independent oracles for
// gradient and value checks. Nothing here calls into the library's op layer;
// values are recomputed from parameter storage directly.

#include <cmath>
#include <numbers>
#include <vector>

namespace ref {

struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}
    double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
};

inline Mat from_floats(const std::vector<float>& vals, int rows, int cols) {
    Mat m(rows, cols);
    for (size_t i = 0; i < vals.size(); ++i) m.v[i] = vals[i];
    return m;
}

inline Mat matmul(const Mat& a, const Mat& b) {
    Mat c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < b.cols; ++j) {
            double acc = 0.0;
            for (int k = 0; k < a.cols; ++k) acc += a.at(i, k) * b.at(k, j);
            c.at(i, j) = acc;
        }
    return c;
}

inline Mat transpose(const Mat& a) {
    Mat c(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) c.at(j, i) = a.at(i, j);
    return c;
}

inline Mat add(const Mat& a, const Mat& b) {
    Mat c = a;
    for (size_t i = 0; i < c.v.size(); ++i) c.v[i] += b.v[i];
    return c;
}

inline Mat mul(const Mat& a, const Mat& b) {
    Mat c = a;
    for (size_t i = 0; i < c.v.size(); ++i) c.v[i] *= b.v[i];
    return c;
}

inline Mat scale(const Mat& a, double s) {
    Mat c = a;
    for (auto& x : c.v) x *= s;
    return c;
}

inline Mat add_rowvec(const Mat& a, const Mat& b) {
    Mat c = a;
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) c.at(i, j) += b.v[static_cast<size_t>(j)];
    return c;
}

// Masked softmax; mask entries interpreted as "may attend". mask == nullptr
// means unmasked.
inline Mat softmax_rows(const Mat& x, const std::vector<uint8_t>* mask = nullptr) {
    Mat p(x.rows, x.cols);
    for (int i = 0; i < x.rows; ++i) {
        double mx = -1e300;
        for (int j = 0; j < x.cols; ++j) {
            if (mask && !(*mask)[static_cast<size_t>(i) * x.cols + j]) continue;
            mx = std::max(mx, x.at(i, j));
        }
        double sum = 0.0;
        for (int j = 0; j < x.cols; ++j) {
            if (mask && !(*mask)[static_cast<size_t>(i) * x.cols + j]) continue;
            sum += std::exp(x.at(i, j) - mx);
        }
        for (int j = 0; j < x.cols; ++j) {
            if (mask && !(*mask)[static_cast<size_t>(i) * x.cols + j]) continue;
            p.at(i, j) = std::exp(x.at(i, j) - mx) / sum;
        }
    }
    return p;
}

inline Mat layernorm(const Mat& x, const Mat& gamma, const Mat& beta, double eps) {
    Mat y(x.rows, x.cols);
    for (int i = 0; i < x.rows; ++i) {
        double mu = 0.0;
        for (int j = 0; j < x.cols; ++j) mu += x.at(i, j);
        mu /= x.cols;
        double var = 0.0;
        for (int j = 0; j < x.cols; ++j) var += (x.at(i, j) - mu) * (x.at(i, j) - mu);
        var /= x.cols;
        double inv = 1.0 / std::sqrt(var + eps);
        for (int j = 0; j < x.cols; ++j)
            y.at(i, j) = (x.at(i, j) - mu) * inv * gamma.v[static_cast<size_t>(j)] +
                         beta.v[static_cast<size_t>(j)];
    }
    return y;
}

inline Mat gelu(const Mat& x) {
    Mat y = x;
    for (auto& v : y.v) v = 0.5 * v * (1.0 + std::erf(v / std::numbers::sqrt2));
    return y;
}

inline double cross_entropy(const Mat& logits, const std::vector<int>& targets,
                            int ignore_index) {
    double total = 0.0;
    int kept = 0;
    for (int i = 0; i < logits.rows; ++i) {
        int t = targets[static_cast<size_t>(i)];
        if (t == ignore_index) continue;
        double mx = -1e300;
        for (int j = 0; j < logits.cols; ++j) mx = std::max(mx, logits.at(i, j));
        double sum = 0.0;
        for (int j = 0; j < logits.cols; ++j) sum += std::exp(logits.at(i, j) - mx);
        total += mx + std::log(sum) - logits.at(i, t);
        ++kept;
    }
    return total / kept;
}

inline Mat l2_normalize_rows(const Mat& x) {
    Mat y = x;
    for (int i = 0; i < x.rows; ++i) {
        double nm = 0.0;
        for (int j = 0; j < x.cols; ++j) nm += x.at(i, j) * x.at(i, j);
        nm = std::sqrt(nm);
        for (int j = 0; j < x.cols; ++j) y.at(i, j) = x.at(i, j) / nm;
    }
    return y;
}

inline Mat mean_rows(const Mat& x) {
    Mat y(1, x.cols);
    for (int j = 0; j < x.cols; ++j) {
        double acc = 0.0;
        for (int i = 0; i < x.rows; ++i) acc += x.at(i, j);
        y.at(0, j) = acc / x.rows;
    }
    return y;
}

inline Mat max_over_rows(const Mat& x) {
    Mat y(1, x.cols);
    for (int j = 0; j < x.cols; ++j) {
        double best = x.at(0, j);
        for (int i = 1; i < x.rows; ++i) best = std::max(best, x.at(i, j));
        y.at(0, j) = best;
    }
    return y;
}

inline Mat concat_rows(const std::vector<Mat>& parts) {
    int rows = 0;
    for (const auto& p : parts) rows += p.rows;
    Mat c(rows, parts[0].cols);
    int off = 0;
    for (const auto& p : parts) {
        for (int i = 0; i < p.rows; ++i)
            for (int j = 0; j < p.cols; ++j) c.at(off + i, j) = p.at(i, j);
        off += p.rows;
    }
    return c;
}

inline Mat slice_rows(const Mat& a, int start, int count) {
    Mat c(count, a.cols);
    for (int i = 0; i < count; ++i)
        for (int j = 0; j < a.cols; ++j) c.at(i, j) = a.at(start + i, j);
    return c;
}

inline double sum(const Mat& a) {
    double acc = 0.0;
    for (double v : a.v) acc += v;
    return acc;
}

inline double mean(const Mat& a) { return sum(a) / static_cast<double>(a.v.size()); }

}  // namespace ref
