#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>
#include <spdlog/spdlog.h>

int main(int argc, char **argv) {
  // Skipped files and unreachable repos are expected in several cases.
  spdlog::set_level(spdlog::level::err);
  return doctest::Context(argc, argv).run();
}
