#include "cscd/ops.hpp"

#include "cscd/errors.hpp"
#include "cscd/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace cscd::ops {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

ConstMap view(const Array& a) { return ConstMap(a.data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols())); }
MutMap view(Array& a) { return MutMap(a.data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols())); }

Tape& tape_of(Var a) {
    if (a.tape == nullptr) throw ContractError("operation on an unbound Var");
    return *a.tape;
}

Tape& tape_of(Var a, Var b) {
    if (a.tape != b.tape || a.tape == nullptr) throw ContractError("operands live on different tapes");
    return *a.tape;
}

void require_same_shape(const char* op, const Array& a, const Array& b) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
    }
}

double stable_sigmoid(double x) {
    double y;
    if (x >= 0.0) {
        y = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        y = e / (1.0 + e);
    }
    return std::clamp(y, kSigmoidFloor, kSigmoidCeil);
}

} // namespace

Var matmul(Var a, Var b) {
    Tape& t = tape_of(a, b);
    const Array& av = t.value(a);
    const Array& bv = t.value(b);
    if (av.cols() != bv.rows()) {
        throw DimensionError("matmul: inner dimensions differ, " + av.shape_string() + " * " + bv.shape_string());
    }
    Array out(av.rows(), bv.cols());
    if (!out.empty() && av.cols() > 0) view(out).noalias() = view(av) * view(bv);
    const bool ng = t.needs_grad(a) || t.needs_grad(b);
    return t.record(std::move(out), ng, [a, b](Tape& tp, const Array& g) {
        if (tp.needs_grad(a)) view(tp.grad(a)).noalias() += view(g) * view(tp.value(b)).transpose();
        if (tp.needs_grad(b)) view(tp.grad(b)).noalias() += view(tp.value(a)).transpose() * view(g);
    });
}

Var linear(Var x, Var weight, Var bias) {
    Tape& t = tape_of(x, weight);
    tape_of(x, bias);
    const Array& xv = t.value(x);
    const Array& wv = t.value(weight);
    const Array& bv = t.value(bias);
    if (xv.cols() != wv.cols() || bv.rows() != 1 || bv.cols() != wv.rows()) {
        throw DimensionError("linear: x " + xv.shape_string() + ", W " + wv.shape_string() + ", b " +
                             bv.shape_string());
    }
    Array out(xv.rows(), wv.rows());
    if (!out.empty()) {
        auto o = view(out);
        if (xv.cols() > 0) o.noalias() = view(xv) * view(wv).transpose();
        o.rowwise() += view(bv).row(0);
    }
    const bool ng = t.needs_grad(x) || t.needs_grad(weight) || t.needs_grad(bias);
    return t.record(std::move(out), ng, [x, weight, bias](Tape& tp, const Array& g) {
        if (tp.needs_grad(x)) view(tp.grad(x)).noalias() += view(g) * view(tp.value(weight));
        if (tp.needs_grad(weight)) view(tp.grad(weight)).noalias() += view(g).transpose() * view(tp.value(x));
        if (tp.needs_grad(bias)) view(tp.grad(bias)).row(0) += view(g).colwise().sum();
    });
}

Var add(Var a, Var b) {
    Tape& t = tape_of(a, b);
    require_same_shape("add", t.value(a), t.value(b));
    Array out = t.value(a);
    out.add_in_place(t.value(b));
    const bool ng = t.needs_grad(a) || t.needs_grad(b);
    return t.record(std::move(out), ng, [a, b](Tape& tp, const Array& g) {
        if (tp.needs_grad(a)) tp.grad(a).add_in_place(g);
        if (tp.needs_grad(b)) tp.grad(b).add_in_place(g);
    });
}

Var sub(Var a, Var b) {
    Tape& t = tape_of(a, b);
    const Array& av = t.value(a);
    const Array& bv = t.value(b);
    require_same_shape("sub", av, bv);
    Array out(av.rows(), av.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
    const bool ng = t.needs_grad(a) || t.needs_grad(b);
    return t.record(std::move(out), ng, [a, b](Tape& tp, const Array& g) {
        if (tp.needs_grad(a)) tp.grad(a).add_in_place(g);
        if (tp.needs_grad(b)) {
            Array& gb = tp.grad(b);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
        }
    });
}

Var mul(Var a, Var b) {
    Tape& t = tape_of(a, b);
    const Array& av = t.value(a);
    const Array& bv = t.value(b);
    require_same_shape("mul", av, bv);
    Array out(av.rows(), av.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
    const bool ng = t.needs_grad(a) || t.needs_grad(b);
    return t.record(std::move(out), ng, [a, b](Tape& tp, const Array& g) {
        if (tp.needs_grad(a)) {
            Array& ga = tp.grad(a);
            const Array& bv = tp.value(b);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
        }
        if (tp.needs_grad(b)) {
            Array& gb = tp.grad(b);
            const Array& av = tp.value(a);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
        }
    });
}

Var add_row(Var x, Var row) {
    Tape& t = tape_of(x, row);
    const Array& xv = t.value(x);
    const Array& rv = t.value(row);
    if (rv.rows() != 1 || rv.cols() != xv.cols()) {
        throw DimensionError("add_row: " + xv.shape_string() + " + " + rv.shape_string());
    }
    Array out = xv;
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += rv[c];
    const bool ng = t.needs_grad(x) || t.needs_grad(row);
    return t.record(std::move(out), ng, [x, row](Tape& tp, const Array& g) {
        if (tp.needs_grad(x)) tp.grad(x).add_in_place(g);
        if (tp.needs_grad(row)) {
            Array& gr = tp.grad(row);
            for (std::size_t r = 0; r < g.rows(); ++r)
                for (std::size_t c = 0; c < g.cols(); ++c) gr[c] += g(r, c);
        }
    });
}

Var mul_rowwise(Var x, Var s) {
    Tape& t = tape_of(x, s);
    const Array& xv = t.value(x);
    const Array& sv = t.value(s);
    if (sv.cols() != 1 || sv.rows() != xv.rows()) {
        throw DimensionError("mul_rowwise: " + xv.shape_string() + " by " + sv.shape_string());
    }
    Array out = xv;
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) *= sv[r];
    const bool ng = t.needs_grad(x) || t.needs_grad(s);
    return t.record(std::move(out), ng, [x, s](Tape& tp, const Array& g) {
        const Array& xv = tp.value(x);
        const Array& sv = tp.value(s);
        if (tp.needs_grad(x)) {
            Array& gx = tp.grad(x);
            for (std::size_t r = 0; r < g.rows(); ++r)
                for (std::size_t c = 0; c < g.cols(); ++c) gx(r, c) += g(r, c) * sv[r];
        }
        if (tp.needs_grad(s)) {
            Array& gs = tp.grad(s);
            for (std::size_t r = 0; r < g.rows(); ++r) {
                double acc = 0.0;
                for (std::size_t c = 0; c < g.cols(); ++c) acc += g(r, c) * xv(r, c);
                gs[r] += acc;
            }
        }
    });
}

Var scale(Var x, double factor) {
    Tape& t = tape_of(x);
    Array out = t.value(x);
    for (auto& v : out.values()) v *= factor;
    return t.record(std::move(out), t.needs_grad(x), [x, factor](Tape& tp, const Array& g) {
        Array& gx = tp.grad(x);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
    });
}

Var sigmoid(Var x) {
    Tape& t = tape_of(x);
    const Array& xv = t.value(x);
    Array out(xv.rows(), xv.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(xv[i]);
    const std::uint32_t self = static_cast<std::uint32_t>(t.size());
    return t.record(std::move(out), t.needs_grad(x), [x, self](Tape& tp, const Array& g) {
        const Array& y = tp.value(Var{&tp, self});
        Array& gx = tp.grad(x);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
    });
}

Var leaky_relu(Var x, double slope) {
    if (!(slope > 0.0 && slope < 1.0)) {
        throw ConfigError("leaky_relu: slope must lie in (0,1), got " + std::to_string(slope));
    }
    Tape& t = tape_of(x);
    const Array& xv = t.value(x);
    Array out(xv.rows(), xv.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] >= 0.0 ? xv[i] : slope * xv[i];
    return t.record(std::move(out), t.needs_grad(x), [x, slope](Tape& tp, const Array& g) {
        const Array& xv = tp.value(x);
        Array& gx = tp.grad(x);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += xv[i] >= 0.0 ? g[i] : slope * g[i];
    });
}

Var concat(std::span<const Var> parts) {
    if (parts.empty()) throw DimensionError("concat: no parts");
    Tape& t = tape_of(parts.front());
    const std::size_t rows = t.value(parts.front()).rows();
    std::size_t cols = 0;
    bool ng = false;
    for (Var p : parts) {
        tape_of(parts.front(), p);
        const Array& v = t.value(p);
        if (v.rows() != rows) {
            throw DimensionError("concat: row mismatch " + t.value(parts.front()).shape_string() + " vs " +
                                 v.shape_string());
        }
        cols += v.cols();
        ng = ng || t.needs_grad(p);
    }
    Array out(rows, cols);
    std::size_t offset = 0;
    for (Var p : parts) {
        const Array& v = t.value(p);
        for (std::size_t r = 0; r < rows; ++r) std::copy_n(v.data() + r * v.cols(), v.cols(), out.data() + r * cols + offset);
        offset += v.cols();
    }
    std::vector<Var> saved(parts.begin(), parts.end());
    return t.record(std::move(out), ng, [saved](Tape& tp, const Array& g) {
        std::size_t off = 0;
        for (Var p : saved) {
            const std::size_t pc = tp.value(p).cols();
            if (tp.needs_grad(p) && pc > 0) {
                Array& gp = tp.grad(p);
                for (std::size_t r = 0; r < g.rows(); ++r)
                    for (std::size_t c = 0; c < pc; ++c) gp(r, c) += g(r, off + c);
            }
            off += pc;
        }
    });
}

Var concat(std::initializer_list<Var> parts) { return concat(std::span<const Var>(parts.begin(), parts.size())); }

Var gather_rows(Var x, std::span<const int> index) {
    Tape& t = tape_of(x);
    const Array& xv = t.value(x);
    const std::size_t c = xv.cols();
    Array out(index.size(), c);
    for (std::size_t i = 0; i < index.size(); ++i) {
        const int src = index[i];
        if (src < 0) continue;
        if (static_cast<std::size_t>(src) >= xv.rows()) {
            throw IndexError("gather_rows: index " + std::to_string(src) + " outside " + xv.shape_string());
        }
        std::copy_n(xv.data() + static_cast<std::size_t>(src) * c, c, out.data() + i * c);
    }
    std::vector<int> idx(index.begin(), index.end());
    return t.record(std::move(out), t.needs_grad(x), [x, idx = std::move(idx)](Tape& tp, const Array& g) {
        Array& gx = tp.grad(x);
        const std::size_t c = g.cols();
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] < 0) continue;
            double* dst = gx.data() + static_cast<std::size_t>(idx[i]) * c;
            const double* src = g.data() + i * c;
            for (std::size_t k = 0; k < c; ++k) dst[k] += src[k];
        }
    });
}

Var segment_sum(Var x, std::span<const int> segment, std::size_t segment_count) {
    Tape& t = tape_of(x);
    const Array& xv = t.value(x);
    if (segment.size() != xv.rows()) {
        throw DimensionError("segment_sum: " + std::to_string(segment.size()) + " segment ids for " + xv.shape_string());
    }
    const std::size_t c = xv.cols();
    Array out(segment_count, c);
    for (std::size_t i = 0; i < segment.size(); ++i) {
        const int s = segment[i];
        if (s < 0 || static_cast<std::size_t>(s) >= segment_count) {
            throw IndexError("segment_sum: segment id " + std::to_string(s) + " outside [0," +
                             std::to_string(segment_count) + ")");
        }
        double* dst = out.data() + static_cast<std::size_t>(s) * c;
        const double* src = xv.data() + i * c;
        for (std::size_t k = 0; k < c; ++k) dst[k] += src[k];
    }
    std::vector<int> seg(segment.begin(), segment.end());
    return t.record(std::move(out), t.needs_grad(x), [x, seg = std::move(seg)](Tape& tp, const Array& g) {
        Array& gx = tp.grad(x);
        const std::size_t c = g.cols();
        for (std::size_t i = 0; i < seg.size(); ++i) {
            const double* src = g.data() + static_cast<std::size_t>(seg[i]) * c;
            double* dst = gx.data() + i * c;
            for (std::size_t k = 0; k < c; ++k) dst[k] += src[k];
        }
    });
}

Var segment_softmax(Var scores, std::span<const int> segment, std::size_t segment_count) {
    Tape& t = tape_of(scores);
    const Array& sv = t.value(scores);
    if (sv.cols() != 1 || sv.rows() != segment.size()) {
        throw DimensionError("segment_softmax: scores " + sv.shape_string() + " with " +
                             std::to_string(segment.size()) + " segment ids");
    }
    std::vector<double> seg_max(segment_count, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < segment.size(); ++i) {
        const int s = segment[i];
        if (s < 0 || static_cast<std::size_t>(s) >= segment_count) {
            throw IndexError("segment_softmax: segment id " + std::to_string(s) + " out of range");
        }
        seg_max[s] = std::max(seg_max[s], sv[i]);
    }
    Array out(sv.rows(), 1);
    std::vector<double> denom(segment_count, 0.0);
    for (std::size_t i = 0; i < segment.size(); ++i) {
        out[i] = std::exp(sv[i] - seg_max[segment[i]]);
        denom[segment[i]] += out[i];
    }
    for (std::size_t i = 0; i < segment.size(); ++i) out[i] /= denom[segment[i]];
    std::vector<int> seg(segment.begin(), segment.end());
    const std::uint32_t self = static_cast<std::uint32_t>(t.size());
    return t.record(std::move(out), t.needs_grad(scores),
                    [scores, self, segment_count, seg = std::move(seg)](Tape& tp, const Array& g) {
                        const Array& y = tp.value(Var{&tp, self});
                        std::vector<double> dot(segment_count, 0.0);
                        for (std::size_t i = 0; i < seg.size(); ++i) dot[seg[i]] += y[i] * g[i];
                        Array& gs = tp.grad(scores);
                        for (std::size_t i = 0; i < seg.size(); ++i) gs[i] += y[i] * (g[i] - dot[seg[i]]);
                    });
}

Var masked_softmax(Var scores, const std::vector<bool>& mask) {
    Tape& t = tape_of(scores);
    const Array& sv = t.value(scores);
    if (sv.rows() != 1 || mask.size() != sv.cols()) {
        throw DimensionError("masked_softmax: scores " + sv.shape_string() + " with mask of " +
                             std::to_string(mask.size()));
    }
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        any = true;
        mx = std::max(mx, sv[i]);
    }
    if (!any) throw EmptyNeighborhoodError("masked_softmax: every entry is masked");
    Array out(1, sv.cols());
    double denom = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        out[i] = std::exp(sv[i] - mx);
        denom += out[i];
    }
    for (std::size_t i = 0; i < mask.size(); ++i) out[i] /= denom;
    const std::uint32_t self = static_cast<std::uint32_t>(t.size());
    return t.record(std::move(out), t.needs_grad(scores), [scores, self](Tape& tp, const Array& g) {
        const Array& y = tp.value(Var{&tp, self});
        double dot = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) dot += y[i] * g[i];
        Array& gs = tp.grad(scores);
        // masked entries have y == 0 and receive no gradient
        for (std::size_t i = 0; i < y.size(); ++i) gs[i] += y[i] * (g[i] - dot);
    });
}

Var reshape(Var x, std::size_t rows, std::size_t cols) {
    Tape& t = tape_of(x);
    const Array& xv = t.value(x);
    if (rows * cols != xv.size()) {
        throw DimensionError("reshape: " + xv.shape_string() + " to [" + std::to_string(rows) + "x" +
                             std::to_string(cols) + "]");
    }
    Array out(rows, cols, std::vector<double>(xv.values().begin(), xv.values().end()));
    return t.record(std::move(out), t.needs_grad(x), [x](Tape& tp, const Array& g) {
        Array& gx = tp.grad(x);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
}

Var sum(Var x) {
    Tape& t = tape_of(x);
    double s = 0.0;
    for (double v : t.value(x).values()) s += v;
    return t.record(Array(1, 1, s), t.needs_grad(x), [x](Tape& tp, const Array& g) {
        Array& gx = tp.grad(x);
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[0];
    });
}

Var mean(Var x) {
    const std::size_t n = x.value().size();
    if (n == 0) throw DimensionError("mean: empty array");
    return scale(sum(x), 1.0 / static_cast<double>(n));
}

Var bce_loss(Var pred, std::span<const double> labels) {
    Tape& t = tape_of(pred);
    const Array& pv = t.value(pred);
    if (pv.cols() != 1 || pv.rows() != labels.size() || labels.empty()) {
        throw DimensionError("bce_loss: predictions " + pv.shape_string() + " with " +
                             std::to_string(labels.size()) + " labels");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double y = labels[i];
        if (y != 0.0 && y != 1.0) throw ContractError("bce_loss: label must be 0 or 1, got " + std::to_string(y));
        const double p = std::clamp(pv[i], kLossClamp, 1.0 - kLossClamp);
        total -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    }
    const double n = static_cast<double>(labels.size());
    std::vector<double> ys(labels.begin(), labels.end());
    return t.record(Array(1, 1, total / n), t.needs_grad(pred), [pred, n, ys = std::move(ys)](Tape& tp, const Array& g) {
        const Array& pv = tp.value(pred);
        Array& gp = tp.grad(pred);
        for (std::size_t i = 0; i < ys.size(); ++i) {
            const double p = pv[i];
            if (p < kLossClamp || p > 1.0 - kLossClamp) continue;
            gp[i] += g[0] * (-ys[i] / p + (1.0 - ys[i]) / (1.0 - p)) / n;
        }
    });
}

Var dropout(Var x, double rate, Rng& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout: rate must lie in [0,1), got " + std::to_string(rate));
    if (rate == 0.0) return x;
    Tape& t = tape_of(x);
    const Array& xv = t.value(x);
    Array mask(xv.rows(), xv.cols());
    const double keep = 1.0 - rate;
    for (auto& m : mask.values()) m = rng.uniform() < keep ? 1.0 / keep : 0.0;
    return mul(x, t.constant(std::move(mask)));
}

} // namespace cscd::ops
