#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "acceptance.hpp"

// Usage: smolu_acceptance [criterion ...]
int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    char* end = nullptr;
    const long id = std::strtol(argv[i], &end, 10);
    if (*end != '\0' || id < 1 || id > smolu::tools::kCriteria) {
      std::cerr << "unknown criterion '" << argv[i] << "'\n";
      return 1;
    }
    only.push_back(static_cast<int>(id));
  }
  const auto results = smolu::tools::run_acceptance(only, std::cout);
  int failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
  return failed == 0 ? 0 : 2;
}
