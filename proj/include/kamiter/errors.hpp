#ifndef KAMITER_ERRORS_HPP
#define KAMITER_ERRORS_HPP

#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>

namespace kamiter
{

// Compact number formatting for diagnostics.
inline std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Base of every error raised by the library. The `kind()` string is stable
// and is what the CLI prints in its diagnostics.
class Error : public std::runtime_error
{
public:
    Error(std::string kind, const std::string &what) : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

    const std::string &kind() const noexcept
    {
        return kind_;
    }

    // True for errors that describe an infeasible model rather than a bug or
    // bad input (CLI exit code 2).
    virtual bool infeasible() const noexcept
    {
        return false;
    }

private:
    std::string kind_;
};

#define KAMITER_DECLARE_ERROR(Name, Infeasible)                                                                       \
    class Name : public Error                                                                                          \
    {                                                                                                                  \
    public:                                                                                                            \
        explicit Name(const std::string &what) : Error(#Name, what) {}                                                 \
        bool infeasible() const noexcept override                                                                      \
        {                                                                                                              \
            return Infeasible;                                                                                         \
        }                                                                                                              \
    };

KAMITER_DECLARE_ERROR(DimensionMismatch, false)
KAMITER_DECLARE_ERROR(InvalidArgument, false)
KAMITER_DECLARE_ERROR(BoundaryTooClose, false)
KAMITER_DECLARE_ERROR(UnsupportedDimension, false)
KAMITER_DECLARE_ERROR(SmallDivisorBreach, true)
KAMITER_DECLARE_ERROR(SafetyMarginBreach, false)
KAMITER_DECLARE_ERROR(LieSeriesStalled, false)
KAMITER_DECLARE_ERROR(ShiftTooLarge, false)
KAMITER_DECLARE_ERROR(DegreeVanished, true)
KAMITER_DECLARE_ERROR(OutsideSearchBox, true)
KAMITER_DECLARE_ERROR(EpsilonTooLarge, false)
KAMITER_DECLARE_ERROR(OrderTooLow, false)
KAMITER_DECLARE_ERROR(Diverged, false)
KAMITER_DECLARE_ERROR(ModelInfeasible, true)
KAMITER_DECLARE_ERROR(ConfigError, false)

#undef KAMITER_DECLARE_ERROR

// Wraps an error raised inside a KAM step with the step index; keeps the
// original kind and feasibility flag.
class StepFailure : public Error
{
public:
    StepFailure(const Error &cause, int step)
        : Error(cause.kind(), "step " + std::to_string(step) + ": " + detail_of(cause)), infeasible_(cause.infeasible()),
          step_(step)
    {
    }

    bool infeasible() const noexcept override
    {
        return infeasible_;
    }
    int step() const noexcept
    {
        return step_;
    }

private:
    static std::string detail_of(const Error &e)
    {
        const std::string w = e.what();
        const std::string prefix = e.kind() + ": ";
        return w.rfind(prefix, 0) == 0 ? w.substr(prefix.size()) : w;
    }

    bool infeasible_;
    int step_;
};

} // namespace kamiter

#endif // KAMITER_ERRORS_HPP
