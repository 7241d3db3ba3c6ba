#include "shapfair/game.hpp"

#include <cerrno>
#include <cmath>
#include <cstring>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

namespace shapfair {

namespace {

// Write to a pipe whose reader may already be gone: block SIGPIPE on this
// thread for the duration and swallow any pending instance, so a dead child
// surfaces as EPIPE instead of killing the process.
ssize_t write_no_sigpipe(int fd, const char* data, std::size_t size) {
    sigset_t pipe_only, previous;
    sigemptyset(&pipe_only);
    sigaddset(&pipe_only, SIGPIPE);
    pthread_sigmask(SIG_BLOCK, &pipe_only, &previous);
    const ssize_t n = write(fd, data, size);
    if (n < 0 && errno == EPIPE) {
        struct timespec zero{0, 0};
        while (sigtimedwait(&pipe_only, nullptr, &zero) == SIGPIPE) {}
    }
    pthread_sigmask(SIG_SETMASK, &previous, nullptr);
    return n;
}

// One child process speaking the Utility Line Protocol. Queries are
// serialised through a mutex; the child sees one EVAL at a time.
class UtilityChild {
  public:
    UtilityChild(const std::string& command, double timeout_seconds)
        : command_(command), timeout_ms_(static_cast<int>(timeout_seconds * 1000.0)) {
        int to_child[2], from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            throw external_utility_error("pipe() failed: " + std::string(strerror(errno)));
        pid_ = fork();
        if (pid_ < 0)
            throw external_utility_error("fork() failed: " + std::string(strerror(errno)));
        if (pid_ == 0) {
            setpgid(0, 0); // own process group, so teardown reaps grandchildren too
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        setpgid(pid_, pid_);
        close(to_child[0]);
        close(from_child[1]);
        write_fd_ = to_child[1];
        read_fd_ = from_child[0];
        fcntl(write_fd_, F_SETFD, FD_CLOEXEC);
        fcntl(read_fd_, F_SETFD, FD_CLOEXEC);
    }

    ~UtilityChild() {
        if (pid_ > 0) {
            if (write_fd_ >= 0) {
                ssize_t ignored = write_no_sigpipe(write_fd_, "QUIT\n", 5);
                (void)ignored;
                close(write_fd_);
            }
            if (read_fd_ >= 0) close(read_fd_);
            int status = 0;
            // Give the child a moment to exit on QUIT, then insist.
            bool reaped = false;
            for (int spin = 0; spin < 100; ++spin) {
                if (waitpid(pid_, &status, WNOHANG) != 0) {
                    reaped = true;
                    break;
                }
                usleep(5000);
            }
            killpg(pid_, SIGKILL);
            if (!reaped) waitpid(pid_, &status, 0);
        }
    }

    UtilityChild(const UtilityChild&) = delete;
    UtilityChild& operator=(const UtilityChild&) = delete;

    double query(std::uint64_t mask) {
        std::lock_guard<std::mutex> lock(mutex_);
        const std::string request = "EVAL " + std::to_string(mask);
        send_line(request);
        const std::string reply = read_line(request);
        std::istringstream parse(reply);
        std::string tag;
        double value = 0.0;
        if (!(parse >> tag >> value) || tag != "VALUE" || !std::isfinite(value))
            throw external_utility_error("malformed utility reply \"" + reply + "\"", request);
        std::string extra;
        if (parse >> extra)
            throw external_utility_error("trailing garbage in utility reply \"" + reply + "\"",
                                         request);
        return value;
    }

  private:
    void send_line(const std::string& request) {
        const std::string line = request + "\n";
        const char* data = line.c_str();
        std::size_t left = line.size();
        while (left > 0) {
            const ssize_t n = write_no_sigpipe(write_fd_, data, left);
            if (n <= 0)
                throw external_utility_error("utility process is gone (write failed)", request);
            data += n;
            left -= static_cast<std::size_t>(n);
        }
    }

    std::string read_line(const std::string& request) {
        std::string line;
        while (true) {
            const auto newline = buffer_.find('\n');
            if (newline != std::string::npos) {
                line = buffer_.substr(0, newline);
                buffer_.erase(0, newline + 1);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                return line;
            }
            struct pollfd pfd{read_fd_, POLLIN, 0};
            const int ready = poll(&pfd, 1, timeout_ms_);
            if (ready == 0)
                throw external_utility_error("utility query timed out", request);
            if (ready < 0)
                throw external_utility_error("poll() failed: " + std::string(strerror(errno)),
                                             request);
            char chunk[4096];
            const ssize_t n = read(read_fd_, chunk, sizeof chunk);
            if (n <= 0)
                throw external_utility_error("utility process exited mid-query", request);
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    std::string command_;
    int timeout_ms_;
    pid_t pid_ = -1;
    int write_fd_ = -1;
    int read_fd_ = -1;
    std::string buffer_;
    std::mutex mutex_;
};

} // namespace

CooperativeGame make_subprocess_game(const std::string& command, int n,
                                     double timeout_seconds) {
    auto child = std::make_shared<UtilityChild>(command, timeout_seconds);
    return CooperativeGame(n, [child](Coalition c) { return child->query(c.mask); });
}

} // namespace shapfair
