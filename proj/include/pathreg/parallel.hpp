#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include <boost/random/mersenne_twister.hpp>

namespace pathreg {

/// Engine used for every random stream in the library.
using Engine = boost::random::mt19937_64;

/// Number of draws generated from a single RNG stream.
inline constexpr std::size_t kChunkSize = 512;

/// Independent stream for (seed, chunk index); a pure function of its inputs.
Engine make_stream(std::uint64_t seed, std::uint64_t chunk);

/// Worker count: SMALLBALL_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Runs task(i) for i in [0, count) on up to worker_count() threads.
/// Each task must write only to its own output slot.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task);

}  // namespace pathreg
