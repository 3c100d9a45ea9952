#include "tactoshape/harness/cli.hpp"

int main(int argc, char** argv) {
    return tact::harness::cli_main(argc, argv);
}
