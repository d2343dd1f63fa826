// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//
//   ddlab_acceptance [--threads N] [name ...]
//
// With no names every check runs. Seeds are pinned in the library.

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>
#include <vector>

#include "ddlab/verify.hpp"

int main(int argc, char** argv) {
  ddlab::VerifyOptions opts;
  std::vector<std::string> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) {
      opts.threads = std::atoi(argv[++i]);
    } else {
      only.emplace_back(argv[i]);
    }
  }
  const int failures = ddlab::run_acceptance(only, opts, std::cout);
  std::cout << failures << " of " << (only.empty() ? ddlab::acceptance_checks().size() : only.size())
            << " criteria failed\n";
  return failures == 0 ? 0 : 1;
}
