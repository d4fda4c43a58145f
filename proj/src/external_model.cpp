#include <csignal>
#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "shapanova/errors.hpp"
#include "shapanova/model.hpp"

namespace shapanova {
namespace {

std::string format_csv(const Eigen::Ref<const Eigen::MatrixXd>& inputs) {
  std::string out;
  out.reserve(static_cast<std::size_t>(inputs.size()) * 20);
  char buf[40];
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    for (Eigen::Index j = 0; j < inputs.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", inputs(i, j));
      out += buf;
      out += (j + 1 < inputs.cols()) ? ',' : '\n';
    }
  }
  return out;
}

struct ChildProcess {
  pid_t pid = -1;
  int stdin_fd = -1;
  int stdout_fd = -1;
  int stderr_fd = -1;
};

ChildProcess spawn(const std::string& command) {
  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0 || pipe(err_pipe) != 0)
    fail(ErrorKind::Evaluation, "pipe() failed: " + std::string(std::strerror(errno)));
  pid_t pid = fork();
  if (pid < 0)
    fail(ErrorKind::Evaluation, "fork() failed: " + std::string(std::strerror(errno)));
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    close(in_pipe[0]); close(in_pipe[1]);
    close(out_pipe[0]); close(out_pipe[1]);
    close(err_pipe[0]); close(err_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    std::fprintf(stderr, "exec failed: %s\n", std::strerror(errno));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  close(err_pipe[1]);
  return ChildProcess{pid, in_pipe[1], out_pipe[0], err_pipe[0]};
}

/// Runs one batch through the child: feed stdin from a writer thread while
/// draining stdout/stderr with poll(), so neither side can deadlock on a
/// full pipe buffer.
void run_child(const std::string& command, const std::string& input,
               std::string& out, std::string& err, int& exit_status) {
  ChildProcess child = spawn(command);

  std::thread writer([&]() {
    // a child that exits without reading stdin must surface as EPIPE,
    // not kill the process
    sigset_t pipe_set;
    sigemptyset(&pipe_set);
    sigaddset(&pipe_set, SIGPIPE);
    pthread_sigmask(SIG_BLOCK, &pipe_set, nullptr);
    std::size_t off = 0;
    while (off < input.size()) {
      ssize_t n = write(child.stdin_fd, input.data() + off, input.size() - off);
      if (n <= 0) break;  // child may exit early; reader reports the status
      off += static_cast<std::size_t>(n);
    }
    close(child.stdin_fd);
    sigset_t pending;
    sigpending(&pending);
    if (sigismember(&pending, SIGPIPE)) {
      struct timespec zero = {0, 0};
      sigtimedwait(&pipe_set, nullptr, &zero);  // consume the pending signal
    }
  });

  struct pollfd fds[2] = {{child.stdout_fd, POLLIN, 0}, {child.stderr_fd, POLLIN, 0}};
  bool open_fd[2] = {true, true};
  char buf[65536];
  while (open_fd[0] || open_fd[1]) {
    fds[0].events = open_fd[0] ? POLLIN : 0;
    fds[1].events = open_fd[1] ? POLLIN : 0;
    if (poll(fds, 2, -1) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (int k = 0; k < 2; ++k) {
      if (!open_fd[k] || !(fds[k].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      ssize_t n = read(k == 0 ? child.stdout_fd : child.stderr_fd, buf, sizeof(buf));
      if (n > 0) {
        (k == 0 ? out : err).append(buf, static_cast<std::size_t>(n));
      } else {
        open_fd[k] = false;
      }
    }
  }
  writer.join();
  close(child.stdout_fd);
  close(child.stderr_fd);
  int status = 0;
  waitpid(child.pid, &status, 0);
  exit_status = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
}

Eigen::VectorXd parse_predictions(const std::string& out, Eigen::Index expected,
                                  const std::string& command) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(expected));
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < out.size()) {
    std::size_t end = out.find('\n', pos);
    if (end == std::string::npos) end = out.size();
    std::string line = out.substr(pos, end - pos);
    pos = end + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() && pos >= out.size()) break;  // trailing newline
    ++line_no;
    char* tail = nullptr;
    errno = 0;
    double v = std::strtod(line.c_str(), &tail);
    while (tail && *tail == ' ') ++tail;
    if (line.empty() || tail == line.c_str() || (tail && *tail != '\0') || errno == ERANGE)
      fail(ErrorKind::Evaluation, "external model '" + command +
                                      "': unparseable prediction on line " +
                                      std::to_string(line_no) + ": '" + line + "'");
    values.push_back(v);
  }
  if (static_cast<Eigen::Index>(values.size()) != expected)
    fail(ErrorKind::Evaluation,
         "external model '" + command + "' emitted " + std::to_string(values.size()) +
             " predictions for " + std::to_string(expected) + " rows");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

ModelFunction load_external_model(const std::string& command, int dimension) {
  require(!command.empty(), ErrorKind::Input, "external model command is empty");
  require(dimension >= 1, ErrorKind::Input, "model dimension must be positive");
  auto lock = std::make_shared<std::mutex>();
  auto evaluator = [command, lock](const Eigen::Ref<const Eigen::MatrixXd>& inputs)
      -> Eigen::VectorXd {
    std::lock_guard<std::mutex> guard(*lock);
    std::string out, err;
    int exit_status = 0;
    run_child(command, format_csv(inputs), out, err, exit_status);
    if (exit_status != 0) {
      std::string detail = err.substr(0, 512);
      fail(ErrorKind::Evaluation, "external model '" + command + "' exited with status " +
                                      std::to_string(exit_status) +
                                      (detail.empty() ? "" : ("; stderr: " + detail)));
    }
    return parse_predictions(out, inputs.rows(), command);
  };
  return ModelFunction(dimension, "external:" + command, std::move(evaluator));
}

}  // namespace shapanova
