#include "ctrlsum/policy.hpp"

#include <cmath>

#include "ctrlsum/error.hpp"
#include "ctrlsum/rng.hpp"

namespace ctrlsum {
namespace {

using Matrix = PolicyParams::Matrix;

Eigen::Map<Matrix> block_view(Eigen::VectorXd& flat, const PolicyParams::Block& b) {
  return {flat.data() + b.offset, b.rows, b.cols};
}

/// Log-softmax of `logits` into `out`.
void log_softmax(const Eigen::VectorXd& logits, Eigen::VectorXd& out) {
  const double max = logits.maxCoeff();
  const double lse = max + std::log((logits.array() - max).exp().sum());
  out = logits.array() - lse;
}

Eigen::Index argmax_lowest(const Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace

void PolicyDims::validate() const {
  if (vocab < 1 || embed < 1 || control < 1 || hidden < 1 || control_rows < 1) {
    throw ConfigError("policy dimensions must all be positive");
  }
  if (vocab <= Vocabulary::kEos) throw ConfigError("policy vocabulary must include <eos>");
}

std::size_t PolicyDims::parameter_count() const {
  const auto blocks = PolicyParams::layout(*this);
  const auto& last = blocks.back();
  return last.offset + static_cast<std::size_t>(last.rows) * static_cast<std::size_t>(last.cols);
}

std::array<PolicyParams::Block, 8> PolicyParams::layout(const PolicyDims& d) {
  std::array<Block, 8> blocks{{
      {0, d.vocab, d.embed, "token_embedding"},
      {0, d.control_rows, d.control, "control_embedding"},
      {0, d.hidden, d.hidden, "w_hidden"},
      {0, d.hidden, d.embed, "w_input"},
      {0, d.hidden, d.embed, "w_document"},
      {0, d.hidden, d.control, "w_control"},
      {0, d.vocab, d.hidden, "w_output"},
      {0, d.vocab, 1, "output_bias"},
  }};
  std::size_t offset = 0;
  for (auto& b : blocks) {
    b.offset = offset;
    offset += static_cast<std::size_t>(b.rows) * static_cast<std::size_t>(b.cols);
  }
  return blocks;
}

PolicyParams::PolicyParams(const PolicyDims& dims) : dims_(dims) {
  dims_.validate();
  flat_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dims_.parameter_count()));
}

PolicyParams::PolicyParams(const PolicyDims& dims, Eigen::VectorXd flat) : dims_(dims), flat_(std::move(flat)) {
  dims_.validate();
  if (static_cast<std::size_t>(flat_.size()) != dims_.parameter_count()) {
    throw ConfigError("parameter vector has " + std::to_string(flat_.size()) + " entries, dimensions require " +
                      std::to_string(dims_.parameter_count()));
  }
}

PolicyParams PolicyParams::random(const PolicyDims& dims, std::uint64_t seed, double scale) {
  PolicyParams p(dims);
  Rng rng(seed);
  const auto blocks = layout(dims);
  const std::size_t bias_offset = blocks.back().offset;
  for (std::size_t i = 0; i < bias_offset; ++i) p.flat_[static_cast<Eigen::Index>(i)] = scale * rng.normal();
  return p;
}

PolicyParams::ConstMatrixView PolicyParams::view(std::size_t block) const {
  const auto b = layout(dims_)[block];
  return {flat_.data() + b.offset, b.rows, b.cols};
}

Eigen::Map<const Eigen::VectorXd> PolicyParams::output_bias() const {
  const auto b = layout(dims_)[7];
  return {flat_.data() + b.offset, b.rows};
}

std::optional<std::string> PolicyParams::first_non_finite() const {
  for (const auto& b : layout(dims_)) {
    const auto n = static_cast<std::size_t>(b.rows) * static_cast<std::size_t>(b.cols);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = flat_[static_cast<Eigen::Index>(b.offset + i)];
      if (!std::isfinite(v)) {
        return std::string(b.name) + "[" + std::to_string(i / static_cast<std::size_t>(b.cols)) + "," +
               std::to_string(i % static_cast<std::size_t>(b.cols)) + "] = " + std::to_string(v);
      }
    }
  }
  return std::nullopt;
}

Context encode(const PolicyParams& params, TokenSpan document, const ControlRequest& request) {
  const auto& d = params.dims();
  const auto emb = params.token_embedding();
  Context ctx;
  ctx.document = Eigen::VectorXd::Zero(d.embed);
  for (const TokenId t : document) ctx.document += emb.row(t).transpose();
  if (!document.empty()) ctx.document /= static_cast<double>(document.size());

  switch (request.task()) {
    case Task::kLength:
    case Task::kAbstractiveness: {
      const TokenId control = request.task() == Task::kLength ? Vocabulary::length_control(request.bin())
                                                              : Vocabulary::abs_control(request.bin());
      const int row = control - Vocabulary::kFirstLengthControl;
      if (row >= d.control_rows) throw ConfigError("control embedding has too few rows for this request");
      ctx.control = params.control_embedding().row(row).transpose();
      break;
    }
    case Task::kEntity: {
      if (d.control != d.embed) {
        throw ConfigError("entity control needs control dimension equal to embedding dimension");
      }
      ctx.control = Eigen::VectorXd::Zero(d.control);
      const auto& entities = request.entity_list();
      for (const TokenId e : entities) ctx.control += emb.row(e).transpose();
      ctx.control /= static_cast<double>(entities.size());
      break;
    }
  }
  ctx.drive = params.w_control() * ctx.control + params.w_document() * ctx.document;
  return ctx;
}

DecoderState initial_state(const PolicyParams&, const Context& context) {
  return {context.drive.array().tanh().matrix(), 0};
}

StepResult step(const PolicyParams& params, const DecoderState& state, TokenId prev_token, const Context& context) {
  StepResult out;
  const Eigen::VectorXd pre = params.w_hidden() * state.hidden +
                              params.w_input() * params.token_embedding().row(prev_token).transpose() +
                              context.drive;
  out.state.hidden = pre.array().tanh();
  out.state.step = state.step + 1;
  out.logits = params.w_output() * out.state.hidden + params.output_bias();
  return out;
}

TokenSpan Rollout::summary() const {
  TokenSpan all(tokens);
  if (!all.empty() && all.back() == Vocabulary::kEos) return all.first(all.size() - 1);
  return all;
}

double Rollout::total_logprob() const {
  double sum = 0.0;
  for (const double lp : logprobs) sum += lp;
  return sum;
}

namespace {

template <typename Choose>
Rollout decode(const PolicyParams& params, TokenSpan document, const ControlRequest& request, int max_len,
               Choose&& choose) {
  if (max_len < 1) throw ConfigError("max_len must be >= 1");
  const Context ctx = encode(params, document, request);
  DecoderState state = initial_state(params, ctx);
  Rollout r;
  TokenId prev = Vocabulary::kEos;
  Eigen::VectorXd logp;
  for (int t = 0; t < max_len; ++t) {
    auto res = step(params, state, prev, ctx);
    log_softmax(res.logits, logp);
    const auto next = static_cast<TokenId>(choose(logp));
    r.tokens.push_back(next);
    r.logprobs.push_back(logp[next]);
    if (next == Vocabulary::kEos) break;
    state = std::move(res.state);
    prev = next;
  }
  return r;
}

}  // namespace

Rollout sample(const PolicyParams& params, TokenSpan document, const ControlRequest& request,
               std::uint64_t seed, int max_len) {
  Rng rng(seed);
  Rollout r = decode(params, document, request, max_len, [&](const Eigen::VectorXd& logp) {
    double u = rng.uniform();
    const Eigen::Index last = logp.size() - 1;
    for (Eigen::Index i = 0; i < last; ++i) {
      u -= std::exp(logp[i]);
      if (u < 0.0) return i;
    }
    return last;
  });
  r.seed = seed;
  return r;
}

Rollout greedy(const PolicyParams& params, TokenSpan document, const ControlRequest& request, int max_len) {
  Rollout r = decode(params, document, request, max_len, [](const Eigen::VectorXd& logp) { return argmax_lowest(logp); });
  r.greedy = true;
  return r;
}

LogProbGradient logprob_grad(const PolicyParams& params, TokenSpan document, const ControlRequest& request,
                             TokenSpan tokens) {
  const auto& d = params.dims();
  const Context ctx = encode(params, document, request);
  const auto emb = params.token_embedding();
  const auto w_h = params.w_hidden();
  const auto w_e = params.w_input();
  const auto w_o = params.w_output();

  const std::size_t steps = tokens.size();
  std::vector<Eigen::VectorXd> hidden(steps + 1);
  std::vector<Eigen::VectorXd> probs(steps);
  hidden[0] = ctx.drive.array().tanh();

  LogProbGradient out;
  Eigen::VectorXd logp;
  TokenId prev = Vocabulary::kEos;
  for (std::size_t t = 0; t < steps; ++t) {
    const Eigen::VectorXd pre = w_h * hidden[t] + w_e * emb.row(prev).transpose() + ctx.drive;
    hidden[t + 1] = pre.array().tanh();
    const Eigen::VectorXd logits = w_o * hidden[t + 1] + params.output_bias();
    log_softmax(logits, logp);
    out.logprob += logp[tokens[t]];
    probs[t] = logp.array().exp();
    prev = tokens[t];
  }

  out.gradient = Eigen::VectorXd::Zero(params.flat().size());
  const auto blocks = PolicyParams::layout(d);
  auto g_emb = block_view(out.gradient, blocks[0]);
  auto g_ctrl = block_view(out.gradient, blocks[1]);
  auto g_wh = block_view(out.gradient, blocks[2]);
  auto g_we = block_view(out.gradient, blocks[3]);
  auto g_wx = block_view(out.gradient, blocks[4]);
  auto g_wc = block_view(out.gradient, blocks[5]);
  auto g_wo = block_view(out.gradient, blocks[6]);
  Eigen::Map<Eigen::VectorXd> g_bias(out.gradient.data() + blocks[7].offset, d.vocab);

  Eigen::VectorXd carry = Eigen::VectorXd::Zero(d.hidden);
  Eigen::VectorXd d_drive = Eigen::VectorXd::Zero(d.hidden);
  Eigen::VectorXd dz(d.vocab);
  for (std::size_t t = steps; t-- > 0;) {
    dz = -probs[t];
    dz[tokens[t]] += 1.0;
    const Eigen::VectorXd& h = hidden[t + 1];
    g_wo.noalias() += dz * h.transpose();
    g_bias += dz;
    const Eigen::VectorXd dh = w_o.transpose() * dz + carry;
    const Eigen::VectorXd da = dh.array() * (1.0 - h.array().square());
    const TokenId in = t == 0 ? Vocabulary::kEos : tokens[t - 1];
    g_wh.noalias() += da * hidden[t].transpose();
    g_we.noalias() += da * emb.row(in);
    g_emb.row(in) += (w_e.transpose() * da).transpose();
    d_drive += da;
    carry = w_h.transpose() * da;
  }
  d_drive += (carry.array() * (1.0 - hidden[0].array().square())).matrix();

  g_wc.noalias() += d_drive * ctx.control.transpose();
  g_wx.noalias() += d_drive * ctx.document.transpose();
  const Eigen::VectorXd d_control = params.w_control().transpose() * d_drive;
  const Eigen::VectorXd d_document = params.w_document().transpose() * d_drive;
  if (!document.empty()) {
    const Eigen::RowVectorXd share = d_document.transpose() / static_cast<double>(document.size());
    for (const TokenId tok : document) g_emb.row(tok) += share;
  }
  if (request.task() == Task::kEntity) {
    const auto& entities = request.entity_list();
    const Eigen::RowVectorXd share = d_control.transpose() / static_cast<double>(entities.size());
    for (const TokenId e : entities) g_emb.row(e) += share;
  } else {
    const TokenId control = request.task() == Task::kLength ? Vocabulary::length_control(request.bin())
                                                            : Vocabulary::abs_control(request.bin());
    g_ctrl.row(control - Vocabulary::kFirstLengthControl) += d_control.transpose();
  }
  return out;
}

double logprob(const PolicyParams& params, TokenSpan document, const ControlRequest& request, TokenSpan tokens) {
  const Context ctx = encode(params, document, request);
  DecoderState state = initial_state(params, ctx);
  TokenId prev = Vocabulary::kEos;
  double total = 0.0;
  Eigen::VectorXd logp;
  for (const TokenId t : tokens) {
    auto res = step(params, state, prev, ctx);
    log_softmax(res.logits, logp);
    total += logp[t];
    state = std::move(res.state);
    prev = t;
  }
  return total;
}

}  // namespace ctrlsum
