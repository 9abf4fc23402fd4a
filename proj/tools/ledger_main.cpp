#include <iostream>

#include "ledger_commands.hpp"
#include "omic/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ledger: permissioned validator node and block-log tools"};
  app.require_subcommand(1);
  int rc = 1;
  omic::tools::add_ledger_commands(app, rc);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const omic::Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    return 2;
  }
  return rc;
}
