#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "zv/common.hpp"

namespace zv {

class Tape;

// Dense row-major float32 storage. The grad buffer is persistent and only
// populated for leaves that require it; intermediates keep their gradients in
// per-sweep buffers owned by the tape.
struct TensorData {
    std::vector<int> shape;
    std::vector<float> values;
    std::vector<float> grad;  // empty until first accumulation
    bool requires_grad = false;
    std::string name;

    // Leaf-attachment cache: one tape node per (tape, generation).
    const Tape* cached_tape = nullptr;
    uint64_t cached_gen = 0;
    int cached_node = -1;

    size_t size() const { return values.size(); }
};

// Lightweight handle: shared storage plus an optional tape attachment. A
// default-constructed Tensor is "undefined" and used where the spec allows an
// absent value (e.g. text states of a text-free forward).
class Tensor {
public:
    Tensor() = default;
    Tensor(std::vector<int> shape, std::vector<float> values);
    Tensor(std::shared_ptr<TensorData> data, Tape* tape, int node)
        : data_(std::move(data)), tape_(tape), node_(node) {}

    static Tensor zeros(std::vector<int> shape);
    static Tensor full(std::vector<int> shape, float v);
    static Tensor scalar(float v) { return Tensor({1}, {v}); }
    // 2-D literal, mainly for tests.
    static Tensor from_rows(const std::vector<std::vector<float>>& rows);

    bool defined() const { return static_cast<bool>(data_); }
    const std::vector<int>& shape() const { return data_->shape; }
    size_t size() const { return data_->values.size(); }

    // Matrix view: cols = last extent, rows = everything else collapsed.
    int cols() const { return data_->shape.empty() ? 1 : data_->shape.back(); }
    int rows() const {
        size_t c = static_cast<size_t>(cols());
        return c == 0 ? 0 : static_cast<int>(size() / c);
    }

    float at(int i) const { return data_->values[static_cast<size_t>(i)]; }
    float at(int r, int c) const { return data_->values[static_cast<size_t>(r) * cols() + c]; }
    const std::vector<float>& values() const { return data_->values; }

    bool on_tape() const { return tape_ != nullptr; }
    Tape* tape() const { return tape_; }
    int node() const { return node_; }
    const std::shared_ptr<TensorData>& data() const { return data_; }

    // Value copy with no tape attachment.
    Tensor detached() const;

private:
    std::shared_ptr<TensorData> data_;
    Tape* tape_ = nullptr;
    int node_ = -1;
};

// Define-by-run gradient tape. Rebuilt per forward pass; backward seeds the
// scalar loss with 1 and sweeps nodes in reverse insertion order, which is a
// valid topological order by construction. Gradients of intermediates live in
// per-sweep float64 buffers (values stay float32, accumulation runs in
// 64-bit); leaves with requires_grad accumulate into their persistent float32
// grad, so repeated backward calls without zeroing add up.
class Tape {
public:
    // Receives the upstream gradient of the node's output; accumulates into
    // the node's inputs via Tape::accumulate.
    using BackwardFn = std::function<void(Tape&, const std::vector<double>&)>;

    Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    int record(std::shared_ptr<TensorData> out, BackwardFn back);

    // Cached leaf attachment: the same storage attached twice to one tape
    // yields the same node, so gradients from multiple uses accumulate.
    Tensor leaf(const std::shared_ptr<TensorData>& data);

    void backward(const Tensor& loss);

    // Only meaningful inside a backward sweep.
    void accumulate(int node, const std::vector<double>& g);
    void accumulate(int node, const double* g, size_t n);

    size_t num_nodes() const { return nodes_.size(); }
    uint64_t generation() const { return gen_; }

private:
    struct Node {
        std::shared_ptr<TensorData> out;
        BackwardFn back;  // null for leaves
    };
    std::vector<Node> nodes_;
    std::vector<std::vector<double>> sweep_;
    uint64_t gen_;
};

// A named, persistent model parameter.
struct Param {
    std::string name;
    std::shared_ptr<TensorData> data;

    Param() = default;
    Param(std::string name, std::vector<int> shape, std::vector<float> init,
          bool trainable = true);

    Tensor on(Tape& t) const { return t.leaf(data); }

    std::vector<float>& values() { return data->values; }
    const std::vector<float>& values() const { return data->values; }
    std::vector<float>& grad() { return data->grad; }
    const std::vector<int>& shape() const { return data->shape; }
    size_t size() const { return data->values.size(); }

    bool requires_grad() const { return data->requires_grad; }
    void set_requires_grad(bool v) { data->requires_grad = v; }
    void zero_grad() { data->grad.assign(data->grad.size(), 0.0f); }
};

}  // namespace zv
