#pragma once

// Umbrella header: the whole library.

#include "lade/adam.hpp"
#include "lade/array.hpp"
#include "lade/autoencoder.hpp"
#include "lade/blas.hpp"
#include "lade/checkpoint.hpp"
#include "lade/checks.hpp"
#include "lade/commands.hpp"
#include "lade/config.hpp"
#include "lade/crc32.hpp"
#include "lade/csv.hpp"
#include "lade/dataset.hpp"
#include "lade/errors.hpp"
#include "lade/idx.hpp"
#include "lade/image_io.hpp"
#include "lade/lde.hpp"
#include "lade/parzen.hpp"
#include "lade/rng.hpp"
#include "lade/svg.hpp"
#include "lade/tape.hpp"
#include "lade/toy.hpp"
#include "lade/train.hpp"
