#include "trajkit/cli.hpp"

int main(int argc, char** argv) { return trajkit::cli::run(argc, argv); }
