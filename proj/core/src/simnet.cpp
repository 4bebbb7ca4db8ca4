#include "stratus/simnet.hpp"

#include <algorithm>
#include <cmath>

namespace stratus {

void LinkModel::validate() const {
  if (base_delay < 0) throw std::invalid_argument("link.base_delay_ms must be >= 0");
  if (jitter < 0 || jitter > base_delay)
    throw std::invalid_argument("link.jitter_ms must be in [0, base_delay]");
  if (bandwidth_bits_per_s <= 0) throw std::invalid_argument("link.bandwidth must be > 0");
  if (loss < 0 || loss > 1) throw std::invalid_argument("link.loss must be in [0,1]");
}

SimNet::SimNet(std::int32_t n, LinkModel link, std::uint64_t seed, double token_fraction,
               std::uint64_t token_burst_bytes)
    : n_(n), link_(link), token_fraction_(token_fraction), handlers_(static_cast<std::size_t>(n)),
      egress_(static_cast<std::size_t>(n)), silent_(static_cast<std::size_t>(n), false),
      egress_bytes_(static_cast<std::size_t>(n), {0, 0, 0, 0}), rng_(Rng(seed).fork("simnet")) {
  link_.validate();
  for (auto& e : egress_) {
    e.bucket.rate_bytes_per_ns = token_fraction_ * link_.bandwidth_bits_per_s / 8.0 / 1e9;
    e.bucket.burst_bytes = static_cast<double>(token_burst_bytes);
    e.bucket.tokens = e.bucket.burst_bytes;
  }
}

void SimNet::attach(std::int32_t node, std::function<void(const MessageEnvelope&)> handler) {
  handlers_[static_cast<std::size_t>(node)] = std::move(handler);
}

void SimNet::at(SimTime t, std::function<void()> fn) {
  queue_.push(Event{std::max(t, now_), seq_++, std::move(fn)});
}

std::uint64_t SimNet::egress_total(std::int32_t node) const {
  std::uint64_t sum = 0;
  for (auto b : egress_bytes_[static_cast<std::size_t>(node)]) sum += b;
  return sum;
}

void SimNet::send(MessageEnvelope env) {
  const std::int32_t from = env.from.v;
  if (env.from.is_client() || from == env.to) return;  // replicas handle self-delivery inline
  if (silent_[static_cast<std::size_t>(from)]) {
    ++counters_.suppressed_silent;
    return;
  }
  ++counters_.sent;
  egress_bytes_[static_cast<std::size_t>(from)][static_cast<std::size_t>(category_of(env.kind))] +=
      env.size_bytes;

  Egress& eg = egress_[static_cast<std::size_t>(from)];
  if (optimizations_ && env.priority == MsgPriority::Consensus) {
    eg.consensus_q.push_back(std::move(env));
  } else {
    eg.data_q.push_back(std::move(env));
  }
  pump(from);
}

void SimNet::pump(std::int32_t node) {
  Egress& eg = egress_[static_cast<std::size_t>(node)];
  if (eg.busy) return;

  if (!eg.consensus_q.empty()) {
    MessageEnvelope env = std::move(eg.consensus_q.front());
    eg.consensus_q.pop_front();
    begin_serialization(node, std::move(env));
    return;
  }
  if (eg.data_q.empty()) return;

  if (!optimizations_) {
    MessageEnvelope env = std::move(eg.data_q.front());
    eg.data_q.pop_front();
    begin_serialization(node, std::move(env));
    return;
  }

  eg.bucket.refill(now_);
  const double need = static_cast<double>(eg.data_q.front().size_bytes);
  if (eg.bucket.tokens >= need) {
    eg.bucket.tokens -= need;
    MessageEnvelope env = std::move(eg.data_q.front());
    eg.data_q.pop_front();
    begin_serialization(node, std::move(env));
    return;
  }
  if (!eg.wake_pending) {
    eg.wake_pending = true;
    at(eg.bucket.ready_at(now_, need), [this, node] {
      egress_[static_cast<std::size_t>(node)].wake_pending = false;
      pump(node);
    });
  }
}

void SimNet::begin_serialization(std::int32_t node, MessageEnvelope env) {
  Egress& eg = egress_[static_cast<std::size_t>(node)];
  eg.busy = true;
  const Duration ser = static_cast<Duration>(
      std::llround(static_cast<double>(env.size_bytes) * 8.0 / link_.bandwidth_bits_per_s * 1e9));
  at(now_ + ser, [this, node, env = std::move(env)]() mutable {
    Egress& e2 = egress_[static_cast<std::size_t>(node)];
    e2.busy = false;

    if (link_.loss > 0 && rng_.unit() < link_.loss) {
      ++counters_.dropped_loss;
    } else {
      const Duration prop = propagation_delay(now_);
      at(now_ + prop, [this, env = std::move(env)]() {
        ++counters_.delivered;
        if (trace_ != nullptr) trace_line(env, now_);
        handlers_[static_cast<std::size_t>(env.to)](env);
      });
    }
    pump(node);
  });
}

Duration SimNet::propagation_delay(SimTime at) {
  for (const Window& w : fluctuations_) {
    if (at >= w.start && at < w.end) {
      if (w.hi == w.lo) return w.lo;
      return w.lo + static_cast<Duration>(rng_.below(static_cast<std::uint64_t>(w.hi - w.lo + 1)));
    }
  }
  Duration d = link_.base_delay;
  if (link_.jitter > 0) {
    d += static_cast<Duration>(rng_.below(static_cast<std::uint64_t>(2 * link_.jitter + 1))) -
         link_.jitter;
  }
  return std::max<Duration>(d, 0);
}

void SimNet::inject_fluctuation(SimTime start, Duration duration, Duration lo, Duration hi) {
  if (start < now_) throw std::invalid_argument("fluctuation start is in the past");
  if (hi < lo || lo < 0) throw std::invalid_argument("fluctuation delay range invalid");
  fluctuations_.push_back(Window{start, start + duration, lo, hi});
}

void SimNet::set_silent(std::int32_t node, bool silent) {
  silent_[static_cast<std::size_t>(node)] = silent;
}

void SimNet::run(SimTime until, std::uint64_t max_events) {
  std::uint64_t processed = 0;
  while (!queue_.empty() && queue_.top().at <= until) {
    if (++processed > max_events) {
      throw SimBudgetExceeded("event budget exceeded at t=" + std::to_string(to_ms(now_)) +
                              "ms after " + std::to_string(processed) + " events");
    }
    Event ev = std::move(const_cast<Event&>(queue_.top()));
    queue_.pop();
    now_ = ev.at;
    ev.fn();
  }
  now_ = std::max(now_, until);
}

void SimNet::trace_line(const MessageEnvelope& env, SimTime t) {
  std::string tag;
  switch (env.kind) {
    case MsgKind::PabMsg: tag = short_hex(std::get<PabMsgBody>(env.body).mb->id); break;
    case MsgKind::PabAck: tag = short_hex(std::get<PabAckBody>(env.body).over); break;
    case MsgKind::PabProof: tag = short_hex(std::get<PabProofBody>(env.body).id); break;
    case MsgKind::PabRequest: tag = short_hex(std::get<PabRequestBody>(env.body).id); break;
    case MsgKind::PabResponse: tag = short_hex(std::get<PabResponseBody>(env.body).mb->id); break;
    case MsgKind::LbQuery: tag = short_hex(std::get<LbQueryBody>(env.body).id); break;
    case MsgKind::LbInfo: tag = short_hex(std::get<LbInfoBody>(env.body).id); break;
    case MsgKind::LbForward: tag = short_hex(std::get<LbForwardBody>(env.body).mb->id); break;
    case MsgKind::CePropose:
      tag = "v" + std::to_string(std::get<CeProposeBody>(env.body).proposal->view);
      break;
    case MsgKind::CeVote: tag = "v" + std::to_string(std::get<CeVoteBody>(env.body).view); break;
    case MsgKind::CeNewView:
      tag = "v" + std::to_string(std::get<CeNewViewBody>(env.body).view);
      break;
  }
  (*trace_) << to_ms(t) << ',' << msg_kind_name(env.kind) << ',' << env.from.v << ',' << env.to
            << ',' << env.size_bytes << ',' << tag << '\n';
}

}  // namespace stratus
