#include "hsisr/cli.hpp"

int main(int argc, char** argv) {
    return hsisr::run_cli(argc, argv);
}
