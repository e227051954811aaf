#include "twincity/harness.hpp"

int main(int argc, char** argv) {
    return twincity::harness::run_cli(argc, argv);
}
