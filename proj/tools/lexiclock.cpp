#include <lexiclock/cli.hpp>

int main(int argc, char** argv) { return lexiclock::cli::run(argc, argv); }
