#include "fracwave/cli_runner.hpp"

int main(int argc, char** argv)
{
    return fracwave::cli::run(argc, argv);
}
