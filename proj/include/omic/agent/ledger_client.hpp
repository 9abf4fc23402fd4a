#pragma once

#include "omic/ledger/simnet.hpp"

namespace omic::agent {

// What an agent needs from the ledger: the committed state of some validator
// and a way to submit transactions and wait for their receipt.
class LedgerClient {
 public:
  virtual ~LedgerClient() = default;
  virtual const ledger::LedgerState& state() const = 0;
  // Throws omic::Error carrying the ledger's rejection code.
  virtual ledger::Receipt submit(const ledger::Transaction& tx) = 0;
};

class SimLedgerClient : public LedgerClient {
 public:
  explicit SimLedgerClient(ledger::SimNet& net) : net_(net) {}
  const ledger::LedgerState& state() const override { return net_.reference().state(); }
  ledger::Receipt submit(const ledger::Transaction& tx) override { return net_.submit_and_wait(tx); }

 private:
  ledger::SimNet& net_;
};

}  // namespace omic::agent
