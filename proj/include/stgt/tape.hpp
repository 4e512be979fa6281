#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "stgt/tensor.hpp"

namespace stgt {

struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Reverse-mode tape over dense 2-D tensors. Nodes are recorded in execution
// order; backward() walks them in exact reverse. Single-threaded per instance.
class Tape {
public:
    Var leaf(Tensor value, bool requires_grad = false) {
        return push(std::move(value), requires_grad, {});
    }

    Var constant(Tensor value) { return leaf(std::move(value), false); }

    // Lease a parameter: the node's gradient is accumulated into *grad_slot
    // at the end of backward().
    Var param(const Tensor& value, Tensor* grad_slot) {
        Var v = push(value, true, {});
        nodes_[v.id].lease = grad_slot;
        return v;
    }

    const Tensor& val(Var v) const { return nodes_[v.id].value; }
    const Tensor& grad_of(Var v) const { return nodes_[v.id].grad; }

    std::size_t size() const { return nodes_.size(); }

    // ---- primitives ----

    Var add(Var a, Var b) {
        const Tensor& x = val(a);
        const Tensor& y = val(b);
        require(x.same_shape(y), "add: shape mismatch " + x.shape_str() + " vs " + y.shape_str());
        Tensor out = x;
        for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += y.data[i];
        return push(std::move(out), rg(a) || rg(b), [this, a, b](const Node& n) {
            add_into(a, n.grad, 1.0);
            add_into(b, n.grad, 1.0);
        });
    }

    Var sub(Var a, Var b) {
        const Tensor& x = val(a);
        const Tensor& y = val(b);
        require(x.same_shape(y), "sub: shape mismatch");
        Tensor out = x;
        for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= y.data[i];
        return push(std::move(out), rg(a) || rg(b), [this, a, b](const Node& n) {
            add_into(a, n.grad, 1.0);
            add_into(b, n.grad, -1.0);
        });
    }

    Var mul(Var a, Var b) {
        const Tensor& x = val(a);
        const Tensor& y = val(b);
        require(x.same_shape(y), "mul: shape mismatch");
        Tensor out = x;
        for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= y.data[i];
        return push(std::move(out), rg(a) || rg(b), [this, a, b](const Node& n) {
            if (wants(a)) {
                Tensor& g = grad(a);
                const Tensor& y2 = val(b);
                for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += n.grad.data[i] * y2.data[i];
            }
            if (wants(b)) {
                Tensor& g = grad(b);
                const Tensor& x2 = val(a);
                for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += n.grad.data[i] * x2.data[i];
            }
        });
    }

    // out = k * a + c, elementwise with scalar constants
    Var caffine(Var a, double k, double c) {
        Tensor out = val(a);
        for (double& v : out.data) v = k * v + c;
        return push(std::move(out), rg(a), [this, a, k](const Node& n) {
            add_into(a, n.grad, k);
        });
    }

    // out = a * s where s is a 1x1 tensor node
    Var scale_by(Var a, Var s) {
        require(val(s).size() == 1, "scale_by: scale must be scalar");
        double sv = val(s).data[0];
        Tensor out = val(a);
        for (double& v : out.data) v *= sv;
        return push(std::move(out), rg(a) || rg(s), [this, a, s, sv](const Node& n) {
            add_into(a, n.grad, sv);
            if (wants(s)) {
                const Tensor& x = val(a);
                double acc = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) acc += n.grad.data[i] * x.data[i];
                grad(s).data[0] += acc;
            }
        });
    }

    Var matmul(Var a, Var b) {
        const Tensor& x = val(a);
        const Tensor& y = val(b);
        require(x.cols == y.rows, "matmul: inner dims " + x.shape_str() + " * " + y.shape_str());
        Tensor out(x.rows, y.cols);
        for (std::size_t i = 0; i < x.rows; ++i) {
            for (std::size_t k = 0; k < x.cols; ++k) {
                double xv = x.at(i, k);
                if (xv == 0.0) continue;
                const double* yr = &y.data[k * y.cols];
                double* orow = &out.data[i * out.cols];
                for (std::size_t j = 0; j < y.cols; ++j) orow[j] += xv * yr[j];
            }
        }
        return push(std::move(out), rg(a) || rg(b), [this, a, b](const Node& n) {
            const Tensor& x = val(a);
            const Tensor& y = val(b);
            if (wants(a)) {  // dA += dOut * B^T
                Tensor& g = grad(a);
                for (std::size_t i = 0; i < x.rows; ++i) {
                    for (std::size_t k = 0; k < x.cols; ++k) {
                        double acc = 0.0;
                        for (std::size_t j = 0; j < y.cols; ++j) {
                            acc += n.grad.at(i, j) * y.at(k, j);
                        }
                        g.at(i, k) += acc;
                    }
                }
            }
            if (wants(b)) {  // dB += A^T * dOut
                Tensor& g = grad(b);
                for (std::size_t k = 0; k < x.cols; ++k) {
                    for (std::size_t i = 0; i < x.rows; ++i) {
                        double xv = x.at(i, k);
                        if (xv == 0.0) continue;
                        for (std::size_t j = 0; j < y.cols; ++j) {
                            g.at(k, j) += xv * n.grad.at(i, j);
                        }
                    }
                }
            }
        });
    }

    Var transpose(Var a) {
        const Tensor& x = val(a);
        Tensor out(x.cols, x.rows);
        for (std::size_t i = 0; i < x.rows; ++i)
            for (std::size_t j = 0; j < x.cols; ++j) out.at(j, i) = x.at(i, j);
        return push(std::move(out), rg(a), [this, a](const Node& n) {
            if (!wants(a)) return;
            Tensor& g = grad(a);
            for (std::size_t i = 0; i < g.rows; ++i)
                for (std::size_t j = 0; j < g.cols; ++j) g.at(i, j) += n.grad.at(j, i);
        });
    }

    // broadcast-add a 1xC row vector to every row of m
    Var add_row(Var m, Var v) {
        const Tensor& x = val(m);
        const Tensor& r = val(v);
        require(r.rows == 1 && r.cols == x.cols, "add_row: expected 1x" + std::to_string(x.cols));
        Tensor out = x;
        for (std::size_t i = 0; i < x.rows; ++i)
            for (std::size_t j = 0; j < x.cols; ++j) out.at(i, j) += r.at(0, j);
        return push(std::move(out), rg(m) || rg(v), [this, m, v](const Node& n) {
            add_into(m, n.grad, 1.0);
            if (wants(v)) {
                Tensor& g = grad(v);
                for (std::size_t i = 0; i < n.grad.rows; ++i)
                    for (std::size_t j = 0; j < n.grad.cols; ++j) g.at(0, j) += n.grad.at(i, j);
            }
        });
    }

    Var concat_cols(Var a, Var b) {
        const Tensor& x = val(a);
        const Tensor& y = val(b);
        require(x.rows == y.rows, "concat_cols: row mismatch");
        Tensor out(x.rows, x.cols + y.cols);
        for (std::size_t i = 0; i < x.rows; ++i) {
            for (std::size_t j = 0; j < x.cols; ++j) out.at(i, j) = x.at(i, j);
            for (std::size_t j = 0; j < y.cols; ++j) out.at(i, x.cols + j) = y.at(i, j);
        }
        std::size_t xc = x.cols;
        return push(std::move(out), rg(a) || rg(b), [this, a, b, xc](const Node& n) {
            if (wants(a)) {
                Tensor& g = grad(a);
                for (std::size_t i = 0; i < g.rows; ++i)
                    for (std::size_t j = 0; j < g.cols; ++j) g.at(i, j) += n.grad.at(i, j);
            }
            if (wants(b)) {
                Tensor& g = grad(b);
                for (std::size_t i = 0; i < g.rows; ++i)
                    for (std::size_t j = 0; j < g.cols; ++j) g.at(i, j) += n.grad.at(i, xc + j);
            }
        });
    }

    Var concat_rows(Var a, Var b) {
        const Tensor& x = val(a);
        const Tensor& y = val(b);
        require(x.cols == y.cols, "concat_rows: col mismatch");
        Tensor out(x.rows + y.rows, x.cols);
        std::copy(x.data.begin(), x.data.end(), out.data.begin());
        std::copy(y.data.begin(), y.data.end(), out.data.begin() + x.size());
        std::size_t xr = x.rows;
        return push(std::move(out), rg(a) || rg(b), [this, a, b, xr](const Node& n) {
            if (wants(a)) {
                Tensor& g = grad(a);
                for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += n.grad.data[i];
            }
            if (wants(b)) {
                Tensor& g = grad(b);
                std::size_t off = xr * n.grad.cols;
                for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += n.grad.data[off + i];
            }
        });
    }

    Var slice_cols(Var a, std::size_t from, std::size_t to) {
        const Tensor& x = val(a);
        require(from < to && to <= x.cols, "slice_cols: bad range");
        Tensor out(x.rows, to - from);
        for (std::size_t i = 0; i < x.rows; ++i)
            for (std::size_t j = from; j < to; ++j) out.at(i, j - from) = x.at(i, j);
        return push(std::move(out), rg(a), [this, a, from](const Node& n) {
            if (!wants(a)) return;
            Tensor& g = grad(a);
            for (std::size_t i = 0; i < n.grad.rows; ++i)
                for (std::size_t j = 0; j < n.grad.cols; ++j) g.at(i, from + j) += n.grad.at(i, j);
        });
    }

    Var gather_rows(Var m, std::vector<std::size_t> idx) {
        const Tensor& x = val(m);
        for (std::size_t i : idx) require(i < x.rows, "gather_rows: index out of range");
        Tensor out(idx.size(), x.cols);
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t j = 0; j < x.cols; ++j) out.at(r, j) = x.at(idx[r], j);
        return push(std::move(out), rg(m), [this, m, idx = std::move(idx)](const Node& n) {
            if (!wants(m)) return;
            Tensor& g = grad(m);
            for (std::size_t r = 0; r < idx.size(); ++r)
                for (std::size_t j = 0; j < n.grad.cols; ++j) g.at(idx[r], j) += n.grad.at(r, j);
        });
    }

    // out[s] = sum of rows of m with seg[r] == s, order-insensitive accumulation
    Var segment_sum(Var m, std::vector<std::size_t> seg, std::size_t num_segments) {
        const Tensor& x = val(m);
        require(seg.size() == x.rows, "segment_sum: segment list length");
        for (std::size_t s : seg) require(s < num_segments, "segment_sum: segment id out of range");
        std::vector<std::vector<std::size_t>> by_seg(num_segments);
        for (std::size_t r = 0; r < seg.size(); ++r) by_seg[seg[r]].push_back(r);
        Tensor out(num_segments, x.cols);
        std::vector<double> buf;
        for (std::size_t s = 0; s < num_segments; ++s) {
            for (std::size_t j = 0; j < x.cols; ++j) {
                buf.clear();
                for (std::size_t r : by_seg[s]) buf.push_back(x.at(r, j));
                out.at(s, j) = stable_sum(buf);
            }
        }
        return push(std::move(out), rg(m), [this, m, seg = std::move(seg)](const Node& n) {
            if (!wants(m)) return;
            Tensor& g = grad(m);
            for (std::size_t r = 0; r < seg.size(); ++r)
                for (std::size_t j = 0; j < n.grad.cols; ++j) g.at(r, j) += n.grad.at(seg[r], j);
        });
    }

    Var sum_all(Var a) {
        const Tensor& x = val(a);
        std::vector<double> buf(x.data);
        Tensor out = Tensor::scalar(stable_sum(buf));
        return push(std::move(out), rg(a), [this, a](const Node& n) {
            add_into_all(a, n.grad.data[0]);
        });
    }

    Var softmax_rows(Var a) {
        const Tensor& x = val(a);
        require(all_finite(x), "softmax_rows: non-finite input");
        Tensor out(x.rows, x.cols);
        for (std::size_t i = 0; i < x.rows; ++i) {
            double mx = x.at(i, 0);
            for (std::size_t j = 1; j < x.cols; ++j) mx = std::max(mx, x.at(i, j));
            double denom = 0.0;
            for (std::size_t j = 0; j < x.cols; ++j) {
                double e = std::exp(x.at(i, j) - mx);
                out.at(i, j) = e;
                denom += e;
            }
            for (std::size_t j = 0; j < x.cols; ++j) out.at(i, j) /= denom;
        }
        return push(std::move(out), rg(a), [this, a](const Node& n) {
            if (!wants(a)) return;
            Tensor& g = grad(a);
            for (std::size_t i = 0; i < n.value.rows; ++i) {
                double dot = 0.0;
                for (std::size_t j = 0; j < n.value.cols; ++j)
                    dot += n.grad.at(i, j) * n.value.at(i, j);
                for (std::size_t j = 0; j < n.value.cols; ++j)
                    g.at(i, j) += n.value.at(i, j) * (n.grad.at(i, j) - dot);
            }
        });
    }

    // Row-wise layer norm with learnable gain/bias (1xC each).
    // passthrough skips normalization: out = x * gain + bias (test hook).
    Var layer_norm_rows(Var a, Var gain, Var bias, double eps, bool passthrough = false) {
        const Tensor& x = val(a);
        const Tensor& gn = val(gain);
        const Tensor& bs = val(bias);
        require(eps > 0.0, "layer_norm: eps must be > 0");
        require(gn.rows == 1 && gn.cols == x.cols && bs.rows == 1 && bs.cols == x.cols,
                "layer_norm: gain/bias must be 1x" + std::to_string(x.cols));
        if (passthrough) {
            Var scaled = mul(a, tile_rows(gain, x.rows));
            return add_row(scaled, bias);
        }
        std::size_t C = x.cols;
        Tensor out(x.rows, C);
        Tensor xhat(x.rows, C);
        std::vector<double> inv_std(x.rows);
        for (std::size_t i = 0; i < x.rows; ++i) {
            double mu = 0.0;
            for (std::size_t j = 0; j < C; ++j) mu += x.at(i, j);
            mu /= static_cast<double>(C);
            double var = 0.0;
            for (std::size_t j = 0; j < C; ++j) {
                double d = x.at(i, j) - mu;
                var += d * d;
            }
            var /= static_cast<double>(C);
            double inv = 1.0 / std::sqrt(var + eps);
            inv_std[i] = inv;
            for (std::size_t j = 0; j < C; ++j) {
                double xh = (x.at(i, j) - mu) * inv;
                xhat.at(i, j) = xh;
                out.at(i, j) = xh * gn.at(0, j) + bs.at(0, j);
            }
        }
        return push(std::move(out), rg(a) || rg(gain) || rg(bias),
                    [this, a, gain, bias, xhat = std::move(xhat),
                     inv_std = std::move(inv_std)](const Node& n) {
            std::size_t R = n.grad.rows, C = n.grad.cols;
            const Tensor& gn = val(gain);
            if (wants(gain)) {
                Tensor& g = grad(gain);
                for (std::size_t i = 0; i < R; ++i)
                    for (std::size_t j = 0; j < C; ++j) g.at(0, j) += n.grad.at(i, j) * xhat.at(i, j);
            }
            if (wants(bias)) {
                Tensor& g = grad(bias);
                for (std::size_t i = 0; i < R; ++i)
                    for (std::size_t j = 0; j < C; ++j) g.at(0, j) += n.grad.at(i, j);
            }
            if (wants(a)) {
                Tensor& g = grad(a);
                double invC = 1.0 / static_cast<double>(C);
                for (std::size_t i = 0; i < R; ++i) {
                    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
                    for (std::size_t j = 0; j < C; ++j) {
                        double dxh = n.grad.at(i, j) * gn.at(0, j);
                        sum_dxhat += dxh;
                        sum_dxhat_xhat += dxh * xhat.at(i, j);
                    }
                    for (std::size_t j = 0; j < C; ++j) {
                        double dxh = n.grad.at(i, j) * gn.at(0, j);
                        g.at(i, j) += inv_std[i] *
                            (dxh - invC * sum_dxhat - xhat.at(i, j) * invC * sum_dxhat_xhat);
                    }
                }
            }
        });
    }

    // Student-t kernel: out[i][j] = 1 / (1 + ||H_i - B_j||^2)
    Var student_t_scores(Var h, Var b) {
        const Tensor& H = val(h);
        const Tensor& B = val(b);
        require(H.cols == B.cols, "student_t_scores: feature dim mismatch");
        Tensor out(H.rows, B.rows);
        for (std::size_t i = 0; i < H.rows; ++i) {
            for (std::size_t j = 0; j < B.rows; ++j) {
                double q = 0.0;
                for (std::size_t k = 0; k < H.cols; ++k) {
                    double d = H.at(i, k) - B.at(j, k);
                    q += d * d;
                }
                out.at(i, j) = 1.0 / (1.0 + q);
            }
        }
        return push(std::move(out), rg(h) || rg(b), [this, h, b](const Node& n) {
            const Tensor& H = val(h);
            const Tensor& B = val(b);
            for (std::size_t i = 0; i < H.rows; ++i) {
                for (std::size_t j = 0; j < B.rows; ++j) {
                    double s = n.value.at(i, j);
                    double coef = -2.0 * s * s * n.grad.at(i, j);
                    if (coef == 0.0) continue;
                    for (std::size_t k = 0; k < H.cols; ++k) {
                        double d = H.at(i, k) - B.at(j, k);
                        if (wants(h)) grad(h).at(i, k) += coef * d;
                        if (wants(b)) grad(b).at(j, k) -= coef * d;
                    }
                }
            }
        });
    }

    // G = S^T H with order-insensitive accumulation over nodes:
    // out[j][k] = sum_i S[i][j] * H[i][k]
    Var aggregate_tokens(Var s, Var h) {
        const Tensor& S = val(s);
        const Tensor& H = val(h);
        require(S.rows == H.rows, "aggregate_tokens: row mismatch");
        Tensor out(S.cols, H.cols);
        std::vector<double> buf;
        for (std::size_t j = 0; j < S.cols; ++j) {
            for (std::size_t k = 0; k < H.cols; ++k) {
                buf.clear();
                for (std::size_t i = 0; i < S.rows; ++i) buf.push_back(S.at(i, j) * H.at(i, k));
                out.at(j, k) = stable_sum(buf);
            }
        }
        return push(std::move(out), rg(s) || rg(h), [this, s, h](const Node& n) {
            const Tensor& S = val(s);
            const Tensor& H = val(h);
            if (wants(s)) {
                Tensor& g = grad(s);
                for (std::size_t i = 0; i < S.rows; ++i)
                    for (std::size_t j = 0; j < S.cols; ++j) {
                        double acc = 0.0;
                        for (std::size_t k = 0; k < H.cols; ++k)
                            acc += n.grad.at(j, k) * H.at(i, k);
                        g.at(i, j) += acc;
                    }
            }
            if (wants(h)) {
                Tensor& g = grad(h);
                for (std::size_t i = 0; i < S.rows; ++i)
                    for (std::size_t k = 0; k < H.cols; ++k) {
                        double acc = 0.0;
                        for (std::size_t j = 0; j < S.cols; ++j)
                            acc += S.at(i, j) * n.grad.at(j, k);
                        g.at(i, k) += acc;
                    }
            }
        });
    }

    Var softplus(Var a) {
        Tensor out = val(a);
        for (double& v : out.data) v = v > 30.0 ? v : std::log1p(std::exp(v));
        return push(std::move(out), rg(a), [this, a](const Node& n) {
            if (!wants(a)) return;
            Tensor& g = grad(a);
            const Tensor& x = val(a);
            for (std::size_t i = 0; i < g.size(); ++i)
                g.data[i] += n.grad.data[i] / (1.0 + std::exp(-x.data[i]));
        });
    }

    Var tanh_act(Var a) {
        Tensor out = val(a);
        for (double& v : out.data) v = std::tanh(v);
        return push(std::move(out), rg(a), [this, a](const Node& n) {
            if (!wants(a)) return;
            Tensor& g = grad(a);
            for (std::size_t i = 0; i < g.size(); ++i)
                g.data[i] += n.grad.data[i] * (1.0 - n.value.data[i] * n.value.data[i]);
        });
    }

    Var relu(Var a) {
        Tensor out = val(a);
        for (double& v : out.data) v = v > 0.0 ? v : 0.0;
        return push(std::move(out), rg(a), [this, a](const Node& n) {
            if (!wants(a)) return;
            Tensor& g = grad(a);
            const Tensor& x = val(a);
            for (std::size_t i = 0; i < g.size(); ++i)
                if (x.data[i] > 0.0) g.data[i] += n.grad.data[i];
        });
    }

    Var abs_val(Var a) {
        Tensor out = val(a);
        for (double& v : out.data) v = std::fabs(v);
        return push(std::move(out), rg(a), [this, a](const Node& n) {
            if (!wants(a)) return;
            Tensor& g = grad(a);
            const Tensor& x = val(a);
            for (std::size_t i = 0; i < g.size(); ++i) {
                double s = x.data[i] > 0.0 ? 1.0 : (x.data[i] < 0.0 ? -1.0 : 0.0);
                g.data[i] += n.grad.data[i] * s;
            }
        });
    }

    Var reshape(Var a, std::size_t r, std::size_t c) {
        const Tensor& x = val(a);
        require(r * c == x.size(), "reshape: element count mismatch");
        Tensor out = x;
        out.rows = r;
        out.cols = c;
        return push(std::move(out), rg(a), [this, a](const Node& n) {
            if (!wants(a)) return;
            Tensor& g = grad(a);
            for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += n.grad.data[i];
        });
    }

    // repeat a 1xC row R times (helper for the layer-norm passthrough hook)
    Var tile_rows(Var v, std::size_t r) {
        const Tensor& x = val(v);
        require(x.rows == 1, "tile_rows: expected a row vector");
        Tensor out(r, x.cols);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < x.cols; ++j) out.at(i, j) = x.at(0, j);
        return push(std::move(out), rg(v), [this, v](const Node& n) {
            if (!wants(v)) return;
            Tensor& g = grad(v);
            for (std::size_t i = 0; i < n.grad.rows; ++i)
                for (std::size_t j = 0; j < n.grad.cols; ++j) g.at(0, j) += n.grad.at(i, j);
        });
    }

    // ---- backward ----

    void backward(Var loss) {
        require(val(loss).size() == 1, "backward: loss must be scalar");
        for (Node& n : nodes_) {
            if (n.requires_grad) {
                n.grad = Tensor::zeros(n.value.rows, n.value.cols);
            }
        }
        nodes_[loss.id].grad.data[0] = 1.0;
        for (std::size_t i = nodes_.size(); i-- > 0;) {
            Node& n = nodes_[i];
            if (!n.requires_grad || !n.back) continue;
            n.back(n);
        }
        for (Node& n : nodes_) {
            if (n.lease) {
                if (!all_finite(n.grad)) throw NumericError("backward: non-finite gradient");
                for (std::size_t i = 0; i < n.grad.size(); ++i) n.lease->data[i] += n.grad.data[i];
            }
        }
    }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        std::function<void(const Node&)> back;
        Tensor* lease = nullptr;
    };

    std::vector<Node> nodes_;

    Var push(Tensor value, bool requires_grad, std::function<void(const Node&)> back) {
        if (!all_finite(value)) throw NumericError("tape: non-finite value produced");
        Node n;
        n.value = std::move(value);
        n.requires_grad = requires_grad;
        if (requires_grad) n.back = std::move(back);
        nodes_.push_back(std::move(n));
        return Var{static_cast<int>(nodes_.size() - 1)};
    }

    bool rg(Var v) const { return nodes_[v.id].requires_grad; }
    bool wants(Var v) const { return nodes_[v.id].requires_grad; }
    Tensor& grad(Var v) { return nodes_[v.id].grad; }

    void add_into(Var v, const Tensor& src, double k) {
        if (!wants(v)) return;
        Tensor& g = grad(v);
        for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += k * src.data[i];
    }

    void add_into_all(Var v, double k) {
        if (!wants(v)) return;
        Tensor& g = grad(v);
        for (double& d : g.data) d += k;
    }

    static void require(bool cond, const std::string& msg) {
        if (!cond) throw ConfigError("tape: " + msg);
    }
};

}  // namespace stgt
