#include "zv/lora.hpp"

namespace zv {

namespace {
std::vector<float> gaussian_init(size_t n, double stddev, Rng& rng) {
    std::vector<float> v(n);
    for (auto& x : v) x = rng.gaussianf(stddev);
    return v;
}
}  // namespace

LoRAAdapter LoRAAdapter::make(const std::string& name, int d_in, int d_out, int rank, float alpha,
                              Rng& rng) {
    require(rank >= 1 && rank <= std::min(d_in, d_out),
            "lora rank {} must be in [1, min({}, {})]", rank, d_in, d_out);
    require(alpha > 0.0f, "lora alpha must be positive, got {}", alpha);
    LoRAAdapter ad;
    ad.rank = rank;
    ad.alpha = alpha;
    ad.target = name;
    ad.a = Param(name + ".a", {rank, d_in},
                 gaussian_init(static_cast<size_t>(rank) * d_in, 1.0 / std::sqrt(d_in), rng));
    ad.b = Param(name + ".b", {d_out, rank},
                 std::vector<float>(static_cast<size_t>(d_out) * rank, 0.0f));
    return ad;
}

Linear Linear::make(const std::string& name, int d_in, int d_out, Rng& rng) {
    Linear l;
    double stddev = std::sqrt(2.0 / (d_in + d_out));
    l.w = Param(name + ".w", {d_out, d_in},
                gaussian_init(static_cast<size_t>(d_out) * d_in, stddev, rng));
    l.bias = Param(name + ".b", {d_out}, std::vector<float>(static_cast<size_t>(d_out), 0.0f));
    return l;
}

Linear Linear::identity(const std::string& name, int d) {
    std::vector<float> w(static_cast<size_t>(d) * d, 0.0f);
    for (int i = 0; i < d; ++i) w[static_cast<size_t>(i) * d + i] = 1.0f;
    Linear l;
    l.w = Param(name + ".w", {d, d}, std::move(w));
    l.bias = Param(name + ".b", {d}, std::vector<float>(static_cast<size_t>(d), 0.0f));
    return l;
}

Tensor Linear::apply(Tape& t, const Tensor& x) const {
    require(x.cols() == d_in(), "linear {}: input {} does not match weight {}", w.name,
            shape_str(x.shape()), shape_str(w.shape()));
    if (lora) return lora_forward(t, *this, *lora, x);
    return add_rowvec(matmul(x, transpose(w.on(t))), bias.on(t));
}

Tensor lora_forward(Tape& t, const Linear& base, const LoRAAdapter& adapter, const Tensor& x) {
    require(x.cols() == base.d_in(), "lora_forward: input {} does not match base {}",
            shape_str(x.shape()), shape_str(base.w.shape()));
    require(adapter.a.shape()[1] == base.d_in() && adapter.b.shape()[0] == base.d_out(),
            "lora_forward: adapter ({}x{} -> {}x{}) does not fit base {}", adapter.a.shape()[0],
            adapter.a.shape()[1], adapter.b.shape()[0], adapter.b.shape()[1],
            shape_str(base.w.shape()));
    Tensor y = add_rowvec(matmul(x, transpose(base.w.on(t))), base.bias.on(t));
    Tensor down = matmul(x, transpose(adapter.a.on(t)));        // [rows x r]
    Tensor up = matmul(down, transpose(adapter.b.on(t)));       // [rows x out]
    float s = adapter.alpha / static_cast<float>(adapter.rank);
    return add(y, scale(up, s));
}

Linear merge(const Linear& base, const LoRAAdapter& adapter) {
    int out = base.d_out(), in = base.d_in(), r = adapter.rank;
    double s = static_cast<double>(adapter.alpha) / r;
    std::vector<float> w(base.w.values());
    for (int i = 0; i < out; ++i) {
        for (int j = 0; j < in; ++j) {
            double acc = 0.0;
            for (int k = 0; k < r; ++k)
                acc += static_cast<double>(adapter.b.values()[static_cast<size_t>(i) * r + k]) *
                       static_cast<double>(adapter.a.values()[static_cast<size_t>(k) * in + j]);
            w[static_cast<size_t>(i) * in + j] += static_cast<float>(s * acc);
        }
    }
    Linear merged;
    merged.w = Param(base.w.name + ".merged", {out, in}, std::move(w));
    merged.bias = Param(base.bias.name + ".merged", {out}, base.bias.values());
    return merged;
}

}  // namespace zv
