#include "kgk/cli.hpp"

int main(int argc, char** argv) { return kgk::run(argc, argv); }
