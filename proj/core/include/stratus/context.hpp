#pragma once

#include <functional>

#include "stratus/envelope.hpp"
#include "stratus/rng.hpp"
#include "stratus/time.hpp"

namespace stratus {

// What a protocol component may do to the outside world. The simulator
// provides the real implementation; unit tests substitute a capture shim.
// Timer cancellation is done with generation counters inside the components,
// so `after` is fire-and-forget here.
class Context {
 public:
  virtual ~Context() = default;
  virtual SimTime now() const = 0;
  virtual void send(ReplicaId to, MsgBody body) = 0;
  virtual void broadcast(MsgBody body) = 0;  // every replica except self
  virtual void after(Duration d, std::function<void()> fn) = 0;
  virtual Rng& rng() = 0;
};

}  // namespace stratus
