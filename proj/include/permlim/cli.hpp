#ifndef PERMLIM_CLI_HPP
#define PERMLIM_CLI_HPP

namespace permlim {

/// Entry point of the `permlim` tool. Returns 0 on success, 1 on invalid input, 2 on internal errors.
int run(int argc, char** argv);

}  // namespace permlim

#endif
