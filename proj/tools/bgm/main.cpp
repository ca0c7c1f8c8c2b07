#include "bgm/cli.hpp"

int main(int argc, char** argv) { return bgm::cli::run(argc, argv); }
