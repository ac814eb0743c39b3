#ifndef COHLAB_COHLAB_HPP
#define COHLAB_COHLAB_HPP

#include "cohlab/fock.hpp"
#include "cohlab/holes.hpp"
#include "cohlab/io.hpp"
#include "cohlab/permanent.hpp"
#include "cohlab/pion_laser.hpp"
#include "cohlab/rng.hpp"
#include "cohlab/truncation.hpp"
#include "cohlab/wavepacket.hpp"

#endif  // COHLAB_COHLAB_HPP
