#pragma once

// Control-conditioned autoregressive policy over tokens.
//
//   doc  = mean token embedding of the document (zero for an empty document)
//   ctrl = control embedding row of the requested bin, or for entity requests
//          the mean token embedding of the requested entities
//   u    = W_c ctrl + W_x doc
//   h_0  = tanh(u)
//   h_t  = tanh(W_h h_{t-1} + W_e emb(y_{t-1}) + u),   y_0 = <eos>
//   pi(. | y_<t) = softmax(W_o h_t + b)
//
// All parameters live in one flat vector so gradients share its layout:
// token_embedding (V x d_e), control_embedding (C x d_c), W_h (d_h x d_h),
// W_e (d_h x d_e), W_x (d_h x d_e), W_c (d_h x d_c), W_o (V x d_h), b (V),
// each matrix row-major.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ctrlsum/constraints.hpp"
#include "ctrlsum/vocabulary.hpp"

namespace ctrlsum {

struct PolicyDims {
  int vocab = 64;
  int embed = 16;
  int control = 16;
  int hidden = 32;
  int control_rows = kControlTokens;

  void validate() const;
  std::size_t parameter_count() const;
  friend bool operator==(const PolicyDims&, const PolicyDims&) = default;
};

class PolicyParams {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MatrixView = Eigen::Map<Matrix>;
  using ConstMatrixView = Eigen::Map<const Matrix>;

  /// All-zero parameters.
  explicit PolicyParams(const PolicyDims& dims);
  /// Gaussian entries with standard deviation `scale`, output bias zero.
  static PolicyParams random(const PolicyDims& dims, std::uint64_t seed, double scale = 0.1);
  /// Takes ownership of a flat vector; throws ConfigError on size mismatch.
  PolicyParams(const PolicyDims& dims, Eigen::VectorXd flat);

  const PolicyDims& dims() const { return dims_; }
  const Eigen::VectorXd& flat() const { return flat_; }
  Eigen::VectorXd& flat() { return flat_; }

  ConstMatrixView token_embedding() const { return view(0); }
  ConstMatrixView control_embedding() const { return view(1); }
  ConstMatrixView w_hidden() const { return view(2); }
  ConstMatrixView w_input() const { return view(3); }
  ConstMatrixView w_document() const { return view(4); }
  ConstMatrixView w_control() const { return view(5); }
  ConstMatrixView w_output() const { return view(6); }
  Eigen::Map<const Eigen::VectorXd> output_bias() const;

  /// Name and flat index of the first NaN/Inf entry, if any.
  std::optional<std::string> first_non_finite() const;

  /// Offsets of the blocks above, in order, plus the total size.
  struct Block {
    std::size_t offset;
    int rows;
    int cols;
    const char* name;
  };
  static std::array<Block, 8> layout(const PolicyDims& dims);

 private:
  ConstMatrixView view(std::size_t block) const;

  PolicyDims dims_;
  Eigen::VectorXd flat_;
};

/// Conditioning vectors derived from the document and request.
struct Context {
  Eigen::VectorXd document;
  Eigen::VectorXd control;
  Eigen::VectorXd drive;  // W_c control + W_x document
};

Context encode(const PolicyParams& params, TokenSpan document, const ControlRequest& request);

struct DecoderState {
  Eigen::VectorXd hidden;
  int step = 0;
};

DecoderState initial_state(const PolicyParams& params, const Context& context);

struct StepResult {
  Eigen::VectorXd logits;
  DecoderState state;
};

StepResult step(const PolicyParams& params, const DecoderState& state, TokenId prev_token, const Context& context);

/// Decoded sequence with the log-probability of every emitted token.
struct Rollout {
  TokenSeq tokens;  // ends with <eos> unless truncated at max_len
  std::vector<double> logprobs;
  bool greedy = false;
  std::uint64_t seed = 0;

  /// Tokens with the trailing <eos> removed.
  TokenSpan summary() const;
  double total_logprob() const;
};

Rollout sample(const PolicyParams& params, TokenSpan document, const ControlRequest& request,
               std::uint64_t seed, int max_len);

/// Argmax decoding; ties go to the lowest token id.
Rollout greedy(const PolicyParams& params, TokenSpan document, const ControlRequest& request, int max_len);

struct LogProbGradient {
  double logprob = 0.0;
  Eigen::VectorXd gradient;  // same layout as PolicyParams::flat()
};

/// log pi(tokens | document, request) and its exact gradient by
/// back-propagation through time. `tokens` is scored as given, so include
/// the <eos> when the sequence ended with it.
LogProbGradient logprob_grad(const PolicyParams& params, TokenSpan document, const ControlRequest& request,
                             TokenSpan tokens);

double logprob(const PolicyParams& params, TokenSpan document, const ControlRequest& request, TokenSpan tokens);

}  // namespace ctrlsum
