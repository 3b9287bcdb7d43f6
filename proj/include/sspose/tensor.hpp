#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace sspose {

// Dense row-major tensor. Data and grad are plain double buffers; grad is
// allocated lazily by the tape when a backward pass needs it.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = true;
    std::string name;

    Tensor() = default;
    explicit Tensor(std::vector<int> s, double fill = 0.0) : shape(std::move(s)) {
        data.assign(numel(), fill);
    }
    Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        if (static_cast<std::size_t>(numel()) != data.size())
            throw std::invalid_argument("tensor data length " + std::to_string(data.size()) +
                                        " does not match shape product " + std::to_string(numel()));
    }

    std::size_t numel() const {
        std::size_t n = 1;
        for (int d : shape) n *= static_cast<std::size_t>(d);
        return n;
    }
    bool is_scalar() const { return numel() == 1; }

    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    }
    void zero_grad() {
        if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
    }

    std::string shape_str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape[i]);
        }
        return s + "]";
    }
};

// Records operations in execution order; that order is topological by
// construction, so backward is a straight reverse sweep. A tape may be
// walked backward once; a second backward() is rejected.
class Tape {
  public:
    Tensor* make(std::vector<int> shape, double fill = 0.0) {
        nodes_.push_back(std::make_unique<Tensor>(std::move(shape), fill));
        return nodes_.back().get();
    }
    Tensor* make(std::vector<int> shape, std::vector<double> data) {
        nodes_.push_back(std::make_unique<Tensor>(std::move(shape), std::move(data)));
        return nodes_.back().get();
    }

    void record(std::function<void()> backward_fn) { ops_.push_back(std::move(backward_fn)); }

    void backward(Tensor* root) {
        if (!root->is_scalar())
            throw std::invalid_argument("backward root must be a scalar, got shape " + root->shape_str());
        if (consumed_)
            throw std::logic_error("backward already ran on this tape; build a fresh tape per step");
        consumed_ = true;
        root->ensure_grad();
        root->grad[0] = 1.0;
        for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
    }

    std::size_t size() const { return ops_.size(); }

  private:
    std::vector<std::unique_ptr<Tensor>> nodes_;
    std::vector<std::function<void()>> ops_;
    bool consumed_ = false;
};

}  // namespace sspose
