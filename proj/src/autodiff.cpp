#include "drtci/autodiff.hpp"

#include <cmath>

namespace drtci::ad {

const Tape::Node& Tape::node(Var v) const {
    if (!v.valid() || v.tape != this || v.id >= static_cast<int>(nodes_.size()))
        throw ContractViolation("autodiff: variable does not belong to this tape");
    return nodes_[static_cast<std::size_t>(v.id)];
}

Tape::Node& Tape::node(Var v) {
    return const_cast<Node&>(static_cast<const Tape*>(this)->node(v));
}

Var Tape::leaf(Mat value, bool needs_grad) {
    return push(std::move(value), needs_grad, nullptr);
}

Var Tape::push(Mat val, bool needs_grad, std::function<void(Tape&, const Mat&)> back) {
    Node n;
    n.val = std::move(val);
    n.needs_grad = needs_grad;
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1, this};
}

Mat Tape::grad(Var v) const {
    const Node& n = node(v);
    if (!n.grad_set) return Mat::Zero(n.val.rows(), n.val.cols());
    return n.grad;
}

void Tape::accumulate(int id, const Mat& g) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad) return;
    if (!n.grad_set) {
        n.grad = g;
        n.grad_set = true;
    } else {
        n.grad += g;
    }
}

void Tape::accumulate_rows(int id, int r0, const Mat& g) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad) return;
    if (!n.grad_set) {
        n.grad = Mat::Zero(n.val.rows(), n.val.cols());
        n.grad_set = true;
    }
    n.grad.middleRows(r0, g.rows()) += g;
}

void Tape::backward(Var root) {
    Node& r = node(root);
    if (r.val.rows() != 1 || r.val.cols() != 1)
        throw ContractViolation("autodiff: backward root must be a 1x1 scalar");
    for (auto& n : nodes_) {
        n.grad_set = false;
        n.grad.resize(0, 0);
    }
    accumulate(root.id, Mat::Ones(1, 1));
    for (int id = root.id; id >= 0; --id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (n.grad_set && n.needs_grad && n.back) n.back(*this, n.grad);
    }
}

void Tape::clear() { nodes_.clear(); }

Var Tape::add(Var a, Var b) {
    const Mat v = node(a).val + node(b).val;
    const bool ng = node(a).needs_grad || node(b).needs_grad;
    const int ia = a.id, ib = b.id;
    return push(v, ng, [ia, ib](Tape& t, const Mat& g) {
        t.accumulate(ia, g);
        t.accumulate(ib, g);
    });
}

Var Tape::sub(Var a, Var b) {
    const Mat v = node(a).val - node(b).val;
    const bool ng = node(a).needs_grad || node(b).needs_grad;
    const int ia = a.id, ib = b.id;
    return push(v, ng, [ia, ib](Tape& t, const Mat& g) {
        t.accumulate(ia, g);
        t.accumulate(ib, Mat(-g));
    });
}

Var Tape::mul(Var a, Var b) {
    const Mat v = node(a).val.cwiseProduct(node(b).val);
    const bool ng = node(a).needs_grad || node(b).needs_grad;
    const int ia = a.id, ib = b.id;
    return push(v, ng, [ia, ib](Tape& t, const Mat& g) {
        t.accumulate(ia, g.cwiseProduct(t.nodes_[static_cast<std::size_t>(ib)].val));
        t.accumulate(ib, g.cwiseProduct(t.nodes_[static_cast<std::size_t>(ia)].val));
    });
}

Var Tape::cmul(Var a, const Mat& c) {
    const Mat v = node(a).val.cwiseProduct(c);
    const int ia = a.id;
    return push(v, node(a).needs_grad, [ia, c](Tape& t, const Mat& g) {
        t.accumulate(ia, g.cwiseProduct(c));
    });
}

Var Tape::scale(Var a, double c) {
    const Mat v = node(a).val * c;
    const int ia = a.id;
    return push(v, node(a).needs_grad, [ia, c](Tape& t, const Mat& g) {
        t.accumulate(ia, Mat(g * c));
    });
}

Var Tape::matmul(Var a, Var b) {
    if (node(a).val.cols() != node(b).val.rows())
        throw ContractViolation("autodiff: matmul shape mismatch");
    const Mat v = node(a).val * node(b).val;
    const bool ng = node(a).needs_grad || node(b).needs_grad;
    const int ia = a.id, ib = b.id;
    return push(v, ng, [ia, ib](Tape& t, const Mat& g) {
        t.accumulate(ia, Mat(g * t.nodes_[static_cast<std::size_t>(ib)].val.transpose()));
        t.accumulate(ib, Mat(t.nodes_[static_cast<std::size_t>(ia)].val.transpose() * g));
    });
}

Var Tape::add_bias(Var a, Var bias) {
    const Mat& av = node(a).val;
    const Mat& bv = node(bias).val;
    if (bv.cols() != 1 || bv.rows() != av.rows())
        throw ContractViolation("autodiff: add_bias expects m x 1 bias matching rows");
    Mat v = av;
    v.colwise() += Eigen::VectorXd(bv.col(0));
    const bool ng = node(a).needs_grad || node(bias).needs_grad;
    const int ia = a.id, ib = bias.id;
    return push(std::move(v), ng, [ia, ib](Tape& t, const Mat& g) {
        t.accumulate(ia, g);
        t.accumulate(ib, Mat(g.rowwise().sum()));
    });
}

Var Tape::rows(Var a, int r0, int n) {
    const Mat& av = node(a).val;
    if (r0 < 0 || n < 0 || r0 + n > av.rows())
        throw ContractViolation("autodiff: rows() out of range");
    const Mat v = av.middleRows(r0, n);
    const int ia = a.id;
    return push(v, node(a).needs_grad, [ia, r0](Tape& t, const Mat& g) {
        t.accumulate_rows(ia, r0, g);
    });
}

Var Tape::vcat(const std::vector<Var>& parts) {
    if (parts.empty()) throw ContractViolation("autodiff: vcat of nothing");
    Eigen::Index rows_total = 0;
    const Eigen::Index cols = node(parts.front()).val.cols();
    bool ng = false;
    for (Var p : parts) {
        if (node(p).val.cols() != cols) throw ContractViolation("autodiff: vcat column mismatch");
        rows_total += node(p).val.rows();
        ng = ng || node(p).needs_grad;
    }
    Mat v(rows_total, cols);
    Eigen::Index r = 0;
    std::vector<int> ids;
    std::vector<int> offsets;
    std::vector<int> sizes;
    ids.reserve(parts.size());
    for (Var p : parts) {
        const Mat& pv = node(p).val;
        v.middleRows(r, pv.rows()) = pv;
        ids.push_back(p.id);
        offsets.push_back(static_cast<int>(r));
        sizes.push_back(static_cast<int>(pv.rows()));
        r += pv.rows();
    }
    return push(std::move(v), ng, [ids, offsets, sizes](Tape& t, const Mat& g) {
        for (std::size_t i = 0; i < ids.size(); ++i)
            t.accumulate(ids[i], Mat(g.middleRows(offsets[i], sizes[i])));
    });
}

Var Tape::sigmoid(Var a) {
    Mat v = node(a).val.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    const int ia = a.id;
    Var out = push(std::move(v), node(a).needs_grad, nullptr);
    const int self = out.id;
    node(out).back = [ia, self](Tape& t, const Mat& g) {
        const Mat& y = t.nodes_[static_cast<std::size_t>(self)].val;
        t.accumulate(ia, Mat(g.array() * y.array() * (1.0 - y.array())));
    };
    return out;
}

Var Tape::tanh_(Var a) {
    Mat v = node(a).val.unaryExpr([](double x) { return std::tanh(x); });
    const int ia = a.id;
    Var out = push(std::move(v), node(a).needs_grad, nullptr);
    const int self = out.id;
    node(out).back = [ia, self](Tape& t, const Mat& g) {
        const Mat& y = t.nodes_[static_cast<std::size_t>(self)].val;
        t.accumulate(ia, Mat(g.array() * (1.0 - y.array().square())));
    };
    return out;
}

Var Tape::elu(Var a) {
    Mat v = node(a).val.unaryExpr([](double x) { return x > 0.0 ? x : std::expm1(x); });
    const int ia = a.id;
    Var out = push(std::move(v), node(a).needs_grad, nullptr);
    const int self = out.id;
    node(out).back = [ia, self](Tape& t, const Mat& g) {
        const Mat& y = t.nodes_[static_cast<std::size_t>(self)].val;
        // d/dx elu = 1 for x > 0, exp(x) = y + 1 otherwise
        const Mat d = y.unaryExpr([](double yv) { return yv > 0.0 ? 1.0 : yv + 1.0; });
        t.accumulate(ia, Mat(g.cwiseProduct(d)));
    };
    return out;
}

Var Tape::sum(Var a) {
    Mat v(1, 1);
    v(0, 0) = node(a).val.sum();
    const int ia = a.id;
    const Eigen::Index r = node(a).val.rows(), c = node(a).val.cols();
    return push(std::move(v), node(a).needs_grad, [ia, r, c](Tape& t, const Mat& g) {
        t.accumulate(ia, Mat(Mat::Constant(r, c, g(0, 0))));
    });
}

Var Tape::softmax_ce(Var logits, const Mat& onehot, const Mat& colweight) {
    const Mat& z = node(logits).val;
    if (onehot.rows() != z.rows() || onehot.cols() != z.cols())
        throw ContractViolation("autodiff: softmax_ce label shape mismatch");
    if (colweight.rows() != 1 || colweight.cols() != z.cols())
        throw ContractViolation("autodiff: softmax_ce column weight shape mismatch");
    const Mat probs = softmax_values(z);
    double total = 0.0;
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        double ce = 0.0;
        for (Eigen::Index k = 0; k < z.rows(); ++k) {
            if (onehot(k, j) != 0.0)
                ce -= onehot(k, j) * std::log(std::max(probs(k, j), 1e-12));
        }
        total += colweight(0, j) * ce;
    }
    Mat v(1, 1);
    v(0, 0) = total;
    const int ia = logits.id;
    return push(std::move(v), node(logits).needs_grad,
                [ia, probs, onehot, colweight](Tape& t, const Mat& g) {
                    Mat d = probs - onehot;
                    for (Eigen::Index j = 0; j < d.cols(); ++j) d.col(j) *= colweight(0, j) * g(0, 0);
                    t.accumulate(ia, d);
                });
}

Mat softmax_values(const Mat& logits) {
    Mat out(logits.rows(), logits.cols());
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
        const double m = logits.col(j).maxCoeff();
        Eigen::VectorXd e = (logits.col(j).array() - m).exp();
        out.col(j) = e / e.sum();
    }
    return out;
}

}  // namespace drtci::ad
