// Stub policy process for the extern adapter. Reads frames "LEN <n>\n<bytes>"
// on stdin and answers each with one frame on stdout.
//
//   noop_agent [noop|garbage|sleep|exit]
//
// noop     one "BS <b>: NOOP" line per BS block found in the prompt
// garbage  a reply that never parses
// sleep    never replies
// exit     exits after reading the first prompt

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <thread>

namespace {

bool read_frame(std::string& payload) {
  std::string header;
  if (!std::getline(std::cin, header)) return false;
  if (header.rfind("LEN ", 0) != 0) return false;
  const std::size_t n = std::stoul(header.substr(4));
  payload.assign(n, '\0');
  return static_cast<bool>(std::cin.read(payload.data(), static_cast<std::streamsize>(n)));
}

void write_frame(const std::string& payload) {
  std::cout << "LEN " << payload.size() << "\n" << payload;
  std::cout.flush();
}

std::string noop_reply(const std::string& prompt) {
  std::string out;
  std::size_t pos = 0;
  while ((pos = prompt.find("\nBS ", pos)) != std::string::npos) {
    pos += 4;
    const auto end = prompt.find(' ', pos);
    if (end == std::string::npos) break;
    if (prompt.compare(end, 8, " CACHE: ") == 0 || prompt.compare(end, 7, " CACHE:") == 0) {
      out += "BS " + prompt.substr(pos, end - pos) + ": NOOP\n";
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "noop";
  if (mode != "noop" && mode != "garbage" && mode != "sleep" && mode != "exit") {
    std::cerr << "unknown mode " << mode << "\n";
    return 2;
  }
  std::ios::sync_with_stdio(false);
  std::string prompt;
  while (read_frame(prompt)) {
    if (mode == "exit") return 0;
    if (mode == "sleep") {
      std::this_thread::sleep_for(std::chrono::hours(1));
      return 0;
    }
    write_frame(mode == "garbage" ? std::string("I would rather not.\n") : noop_reply(prompt));
  }
  return 0;
}
