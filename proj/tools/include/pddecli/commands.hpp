#pragma once

#include <string>

namespace pddecli {

// exit codes shared by all subcommands
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitCheck = 4;

int cmd_solve(const std::string& config_path, const std::string& out_dir);
int cmd_verify(const std::string& suite, const std::string& config_path);
int cmd_schedule(int N, double p, double q, const std::string& r0);
int cmd_study(const std::string& config_path, const std::string& out_dir);

}  // namespace pddecli
