#ifndef CSCD_OPS_HPP
#define CSCD_OPS_HPP

#include "cscd/tape.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace cscd {

class Rng;

namespace ops {

/// Output of sigmoid() never reaches 0 or 1: it is clamped to
/// [kSigmoidFloor, kSigmoidCeil]. The upper clamp engages for x > ~36.74,
/// where 1/(1+e^-x) would round to exactly 1.0 in double precision.
inline constexpr double kSigmoidCeil = 1.0 - 0x1p-53;
inline constexpr double kSigmoidFloor = 0x1p-1074;

/// a[p x q] * b[q x r].
Var matmul(Var a, Var b);
/// x[n x in] * W^T + b, with W stored [out x in] and b [1 x out].
Var linear(Var x, Var weight, Var bias);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Elementwise product.
Var mul(Var a, Var b);
/// x[n x c] + row[1 x c] broadcast over rows.
Var add_row(Var x, Var row);
/// Row r of x[n x c] scaled by s[r] with s[n x 1].
Var mul_rowwise(Var x, Var s);
Var scale(Var x, double factor);

Var sigmoid(Var x);
/// Throws ConfigError unless 0 < slope < 1.
Var leaky_relu(Var x, double slope);

/// Column-wise concatenation of parts with equal row counts. Zero-column
/// parts are allowed and vanish.
Var concat(std::span<const Var> parts);
Var concat(std::initializer_list<Var> parts);

/// out[i] = x[index[i]]; a negative index yields a zero row that receives no gradient.
Var gather_rows(Var x, std::span<const int> index);
/// out[segment[i]] += x[i]; the output has `segment_count` rows. Summation
/// order is ascending i for every segment.
Var segment_sum(Var x, std::span<const int> segment, std::size_t segment_count);
/// Softmax of scores[n x 1] within each segment, max-subtracted. Empty
/// segments are legal and produce no entries.
Var segment_softmax(Var scores, std::span<const int> segment, std::size_t segment_count);
/// Softmax over the unmasked entries of scores[1 x n]; masked entries are 0.
/// Throws EmptyNeighborhoodError when every entry is masked.
Var masked_softmax(Var scores, const std::vector<bool>& mask);

/// Row-major reinterpretation; element count must be preserved.
Var reshape(Var x, std::size_t rows, std::size_t cols);
/// Sum of all entries as a 1x1 value.
Var sum(Var x);
Var mean(Var x);

/// Mean binary cross-entropy of pred[n x 1] against binary labels. Predictions
/// are clamped to [kLossClamp, 1 - kLossClamp] before the logarithm; the
/// gradient is zero where the clamp is active.
inline constexpr double kLossClamp = 1e-7;
Var bce_loss(Var pred, std::span<const double> labels);

/// Inverted dropout: keeps each entry with probability 1-rate and rescales by 1/(1-rate).
Var dropout(Var x, double rate, Rng& rng);

} // namespace ops
} // namespace cscd

#endif
