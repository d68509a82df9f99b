#include <kamiter/cli.hpp>

int main(int argc, char **argv)
{
    return kamiter::run_cli(argc, argv);
}
