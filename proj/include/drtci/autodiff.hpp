#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "drtci/common.hpp"

namespace drtci::ad {

using Mat = Eigen::MatrixXd;

class Tape;

// Lightweight handle into a tape node.
struct Var {
    int id = -1;
    Tape* tape = nullptr;
    bool valid() const { return id >= 0 && tape != nullptr; }
};

// Reverse-mode automatic differentiation over dense double matrices.
// Nodes are appended in evaluation order, so the tape itself is a valid
// topological order and backward() is a single reverse sweep.
class Tape {
  public:
    Tape() { nodes_.reserve(1024); }

    Var leaf(Mat value, bool needs_grad);
    Var constant(Mat value) { return leaf(std::move(value), false); }
    Var constant(double v) {
        Mat m(1, 1);
        m(0, 0) = v;
        return leaf(std::move(m), false);
    }

    const Mat& val(Var v) const { return node(v).val; }
    // Gradient of the last backward() root w.r.t. v; zeros if v is unreachable.
    Mat grad(Var v) const;

    // root must be 1x1 (a scalar loss).
    void backward(Var root);

    void clear();
    std::size_t size() const { return nodes_.size(); }

    // --- ops ---
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);            // elementwise
    Var cmul(Var a, const Mat& c);    // elementwise by a constant matrix
    Var scale(Var a, double c);
    Var matmul(Var a, Var b);
    Var add_bias(Var a, Var bias);    // bias is m x 1, broadcast over columns
    Var rows(Var a, int r0, int n);   // contiguous row block
    Var vcat(const std::vector<Var>& parts);
    Var sigmoid(Var a);
    Var tanh_(Var a);
    Var elu(Var a);
    Var sum(Var a);                   // 1x1
    // sum_j colweight(0,j) * cross_entropy(softmax(logits.col(j)), onehot.col(j)); 1x1.
    Var softmax_ce(Var logits, const Mat& onehot, const Mat& colweight);

  private:
    struct Node {
        Mat val;
        Mat grad;
        bool needs_grad = false;
        bool grad_set = false;
        std::function<void(Tape&, const Mat&)> back;  // captures parent ids only
    };

    const Node& node(Var v) const;
    Node& node(Var v);
    Var push(Mat val, bool needs_grad, std::function<void(Tape&, const Mat&)> back);
    void accumulate(int id, const Mat& g);
    void accumulate_rows(int id, int r0, const Mat& g);

    std::vector<Node> nodes_;
};

// Softmax over each column; plain value computation with no tape involvement
// (used where probabilities must be treated as constants).
Mat softmax_values(const Mat& logits);

}  // namespace drtci::ad
