#ifndef MVCHEB_MVCHEB_HPP
#define MVCHEB_MVCHEB_HPP

#include "mvcheb/error.hpp"
#include "mvcheb/experiments.hpp"
#include "mvcheb/io.hpp"
#include "mvcheb/linalg.hpp"
#include "mvcheb/moments.hpp"
#include "mvcheb/random.hpp"
#include "mvcheb/regions.hpp"
#include "mvcheb/sampler.hpp"

#endif // MVCHEB_MVCHEB_HPP
