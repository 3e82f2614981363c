#include <iostream>
#include <string>
#include <vector>

#include "pelastic/cli.hpp"
#include "pelastic/errors.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  try {
    const auto cfg = pel::cli::parse_config(args);
    const auto outcome = pel::cli::run(cfg);
    if (outcome.exit_code != 0) {
      std::cerr << "pelastic: " << outcome.message << '\n';
      return outcome.exit_code;
    }
    std::cout << outcome.message << '\n';
    return 0;
  } catch (const pel::cli::HelpRequested& h) {
    std::cout << h.text;
    return 0;
  } catch (const pel::Error& e) {
    std::cerr << "pelastic: " << e.what() << '\n';
    return e.exit_code();
  }
}
