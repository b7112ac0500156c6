#include "zv/tensor.hpp"

#include <atomic>

namespace zv {

namespace {
size_t shape_numel(const std::vector<int>& shape) {
    require(!shape.empty(), "tensor shape must have at least one extent");
    size_t n = 1;
    for (int e : shape) {
        require(e >= 0, "tensor extent must be non-negative, got {} in {}", e, shape_str(shape));
        n *= static_cast<size_t>(e);
    }
    return n;
}

std::atomic<uint64_t> g_tape_gen{1};
}  // namespace

Tensor::Tensor(std::vector<int> shape, std::vector<float> values) {
    size_t n = shape_numel(shape);
    require(n == values.size(), "shape {} implies {} values, got {}", shape_str(shape), n,
            values.size());
    data_ = std::make_shared<TensorData>();
    data_->shape = std::move(shape);
    data_->values = std::move(values);
}

Tensor Tensor::zeros(std::vector<int> shape) {
    size_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<float>(n, 0.0f));
}

Tensor Tensor::full(std::vector<int> shape, float v) {
    size_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<float>(n, v));
}

Tensor Tensor::from_rows(const std::vector<std::vector<float>>& rows) {
    require(!rows.empty(), "from_rows needs at least one row");
    int c = static_cast<int>(rows[0].size());
    std::vector<float> vals;
    vals.reserve(rows.size() * rows[0].size());
    for (const auto& r : rows) {
        require(static_cast<int>(r.size()) == c, "ragged rows: {} vs {}", r.size(), c);
        vals.insert(vals.end(), r.begin(), r.end());
    }
    return Tensor({static_cast<int>(rows.size()), c}, std::move(vals));
}

Tensor Tensor::detached() const {
    require(defined(), "detached() on undefined tensor");
    auto d = std::make_shared<TensorData>();
    d->shape = data_->shape;
    d->values = data_->values;
    return Tensor(std::move(d), nullptr, -1);
}

Tape::Tape() : gen_(g_tape_gen.fetch_add(1)) {}

int Tape::record(std::shared_ptr<TensorData> out, BackwardFn back) {
    nodes_.push_back(Node{std::move(out), std::move(back)});
    return static_cast<int>(nodes_.size()) - 1;
}

Tensor Tape::leaf(const std::shared_ptr<TensorData>& data) {
    require(static_cast<bool>(data), "cannot attach null storage to tape");
    if (data->cached_tape == this && data->cached_gen == gen_) {
        return Tensor(data, this, data->cached_node);
    }
    int id = record(data, nullptr);
    data->cached_tape = this;
    data->cached_gen = gen_;
    data->cached_node = id;
    return Tensor(data, this, id);
}

void Tape::accumulate(int node, const double* g, size_t n) {
    if (node < 0) return;  // detached input
    auto& buf = sweep_[static_cast<size_t>(node)];
    if (buf.empty()) buf.assign(n, 0.0);
    for (size_t i = 0; i < n; ++i) buf[i] += g[i];
}

void Tape::accumulate(int node, const std::vector<double>& g) {
    accumulate(node, g.data(), g.size());
}

void Tape::backward(const Tensor& loss) {
    require(loss.defined() && loss.on_tape() && loss.tape() == this,
            "backward requires a tensor recorded on this tape");
    require(loss.size() == 1, "backward requires a scalar, got shape {}",
            shape_str(loss.shape()));

    int start = loss.node();
    sweep_.assign(nodes_.size(), {});
    sweep_[static_cast<size_t>(start)] = {1.0};

    for (int i = start; i >= 0; --i) {
        auto& g = sweep_[static_cast<size_t>(i)];
        if (g.empty()) continue;
        if (nodes_[static_cast<size_t>(i)].back) {
            nodes_[static_cast<size_t>(i)].back(*this, g);
        }
    }
    // Flush leaf gradients into persistent float32 storage.
    for (int i = start; i >= 0; --i) {
        auto& node = nodes_[static_cast<size_t>(i)];
        auto& g = sweep_[static_cast<size_t>(i)];
        if (node.back || g.empty() || !node.out->requires_grad) continue;
        auto& dst = node.out->grad;
        if (dst.size() != g.size()) dst.assign(g.size(), 0.0f);
        for (size_t k = 0; k < g.size(); ++k)
            dst[k] = static_cast<float>(static_cast<double>(dst[k]) + g[k]);
    }
    sweep_.clear();
}

Param::Param(std::string name_, std::vector<int> shape, std::vector<float> init, bool trainable) {
    size_t n = shape_numel(shape);
    require(n == init.size(), "param {}: shape {} implies {} values, got {}", name_,
            shape_str(shape), n, init.size());
    name = std::move(name_);
    data = std::make_shared<TensorData>();
    data->shape = std::move(shape);
    data->values = std::move(init);
    data->requires_grad = trainable;
    data->name = name;
}

}  // namespace zv
