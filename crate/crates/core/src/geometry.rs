//! Random placement of antennas and users on the unit disk.
//!
//! All lengths are normalized to a disk of radius 1, so path gains derived
//! from these distances are unitless.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use crate::scalar::Real;

pub type Point<T> = [T; 2];

/// L×K matrix of antenna-to-user distances.
pub type DistanceMatrix<T> = RMatrix<T>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeploymentMode {
    /// Antennas spread uniformly over the disk.
    CellFree,
    /// All antennas at the disk center.
    Colocated,
}

impl DeploymentMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DeploymentMode::CellFree => "cellfree",
            DeploymentMode::Colocated => "colocated",
        }
    }
}

impl std::str::FromStr for DeploymentMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cellfree" | "cell-free" => Ok(Self::CellFree),
            "colocated" | "co-located" => Ok(Self::Colocated),
            other => Err(Error::Format(format!("unknown deployment mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology<T> {
    antennas: Vec<Point<T>>,
    users: Vec<Point<T>>,
    mode: DeploymentMode,
}

#[inline]
pub fn norm<T: Real>(p: Point<T>) -> T {
    p[0].hypot(p[1])
}

#[inline]
pub fn distance<T: Real>(a: Point<T>, b: Point<T>) -> T {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn check_in_disk<T: Real>(points: &[Point<T>], what: &'static str) -> Result<()> {
    // A few ulps of slack for points that were scaled onto the boundary.
    let limit = T::one() + T::lit(4.0) * T::epsilon();
    for p in points {
        let r = norm(*p);
        if !(r <= limit) {
            return Err(Error::Domain {
                what,
                value: r.to_f64_lossy(),
            });
        }
    }
    Ok(())
}

/// `n` points i.i.d. uniform over the unit disk: radius `√u`, angle uniform.
pub fn sample_disk_points<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<Point<T>>> {
    if n == 0 {
        return Err(Error::EmptyInput("disk sample count"));
    }
    Ok((0..n).map(|_| sample_disk_point(rng)).collect())
}

#[inline]
pub fn sample_disk_point<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Point<T> {
    let r = T::unit_uniform(rng).sqrt();
    let theta = T::TAU() * T::unit_uniform(rng);
    let (s, c) = theta.sin_cos();
    [r * c, r * s]
}

impl<T: Real> Topology<T> {
    pub fn new(antennas: Vec<Point<T>>, users: Vec<Point<T>>, mode: DeploymentMode) -> Result<Self> {
        if antennas.is_empty() {
            return Err(Error::EmptyInput("antenna positions"));
        }
        if users.is_empty() {
            return Err(Error::EmptyInput("user positions"));
        }
        check_in_disk(&antennas, "antenna radius")?;
        check_in_disk(&users, "user radius")?;
        if mode == DeploymentMode::Colocated && antennas.iter().any(|p| p[0] != T::zero() || p[1] != T::zero()) {
            return Err(Error::Format("co-located antennas must sit at the origin".into()));
        }
        Ok(Self { antennas, users, mode })
    }

    /// Antennas and users drawn independently and uniformly over the disk.
    pub fn random<R: Rng + ?Sized>(antennas: usize, users: usize, rng: &mut R) -> Result<Self> {
        let a = sample_disk_points(antennas, rng)?;
        let u = sample_disk_points(users, rng)?;
        Self::new(a, u, DeploymentMode::CellFree)
    }

    pub fn antennas(&self) -> &[Point<T>] {
        &self.antennas
    }

    pub fn users(&self) -> &[Point<T>] {
        &self.users
    }

    pub fn mode(&self) -> DeploymentMode {
        self.mode
    }

    pub fn num_antennas(&self) -> usize {
        self.antennas.len()
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    /// Distance of each user from the disk center.
    pub fn user_radii(&self) -> Vec<T> {
        self.users.iter().map(|&p| norm(p)).collect()
    }
}

/// `L` antennas at the origin serving the given users.
pub fn colocated_topology<T: Real>(antennas: usize, users: Vec<Point<T>>) -> Result<Topology<T>> {
    if antennas == 0 {
        return Err(Error::EmptyInput("antenna count"));
    }
    Topology::new(vec![[T::zero(); 2]; antennas], users, DeploymentMode::Colocated)
}

/// Euclidean distance from every antenna (rows) to every user (columns).
pub fn pairwise_distances<T: Real>(topology: &Topology<T>) -> DistanceMatrix<T> {
    let a = topology.antennas();
    let u = topology.users();
    RMatrix::from_fn(a.len(), u.len(), |l, k| distance(a[l], u[k]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_at, Domain};

    #[test]
    fn single_point_in_disk() {
        for seed in 0..20 {
            let mut rng = stream_at(seed, Domain::Oracle, 0, 0);
            let p = sample_disk_points::<f64, _>(1, &mut rng).unwrap();
            assert_eq!(p.len(), 1);
            assert!(norm(p[0]) <= 1.0);
        }
    }

    #[test]
    fn zero_count_rejected() {
        let mut rng = stream_at(0, Domain::Oracle, 0, 0);
        assert_eq!(
            sample_disk_points::<f64, _>(0, &mut rng),
            Err(Error::EmptyInput("disk sample count"))
        );
        assert!(colocated_topology::<f64>(0, vec![[0.1, 0.1]]).is_err());
        assert!(Topology::<f64>::new(vec![], vec![[0.0, 0.0]], DeploymentMode::CellFree).is_err());
        assert!(Topology::<f64>::new(vec![[0.0, 0.0]], vec![], DeploymentMode::CellFree).is_err());
    }

    #[test]
    fn out_of_disk_rejected() {
        assert!(Topology::new(vec![[0.9, 0.9]], vec![[0.0, 0.0]], DeploymentMode::CellFree).is_err());
        assert!(Topology::new(vec![[0.1, 0.0]], vec![[0.0, 0.0]], DeploymentMode::Colocated).is_err());
    }

    #[test]
    fn three_four_five() {
        let t = Topology::new(vec![[0.0, 0.0]], vec![[0.3, 0.4]], DeploymentMode::CellFree).unwrap();
        let d = pairwise_distances(&t);
        assert!((d.get(0, 0) - 0.5_f64).abs() < 1e-15);
    }

    #[test]
    fn colocated_distances_equal_user_radius() {
        let t = colocated_topology(3, vec![[1.0, 0.0]]).unwrap();
        let d = pairwise_distances(&t);
        assert_eq!(d.shape(), (3, 1));
        assert!(d.iter().all(|v| v == 1.0));

        let t = colocated_topology(1, vec![[0.0, 0.0]]).unwrap();
        assert_eq!(pairwise_distances(&t).get(0, 0), 0.0);

        let mut rng = stream_at(5, Domain::Oracle, 0, 0);
        let users: Vec<Point<f64>> = sample_disk_points(10, &mut rng).unwrap();
        let t = colocated_topology(300, users).unwrap();
        let d = pairwise_distances(&t);
        let radii = t.user_radii();
        for (k, r) in radii.iter().enumerate() {
            assert!(d.col(k).iter().all(|v| v == r));
        }
    }

    #[test]
    fn distances_bounded_and_deterministic() {
        let mut rng = stream_at(11, Domain::Oracle, 0, 0);
        let t = Topology::<f64>::random(50, 7, &mut rng).unwrap();
        let d1 = pairwise_distances(&t);
        let d2 = pairwise_distances(&t);
        assert_eq!(d1, d2);
        assert!(d1.iter().all(|v| (0.0..=2.0).contains(&v)));

        let mut rng = stream_at(11, Domain::Oracle, 0, 0);
        assert_eq!(Topology::<f64>::random(50, 7, &mut rng).unwrap(), t);
    }

    #[test]
    fn mean_square_radius_is_half() {
        let n = 100_000;
        let mut rng = stream_at(3, Domain::Oracle, 0, 0);
        let pts = sample_disk_points::<f64, _>(n, &mut rng).unwrap();
        let r2: Vec<f64> = pts.iter().map(|p| p[0] * p[0] + p[1] * p[1]).collect();
        let mean = r2.iter().sum::<f64>() / n as f64;
        let var = r2.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn f32_sampling_stays_in_disk() {
        let mut rng = stream_at(9, Domain::Oracle, 0, 0);
        let pts = sample_disk_points::<f32, _>(10_000, &mut rng).unwrap();
        assert!(pts.iter().all(|&p| norm(p) <= 1.0 + 4.0 * f32::EPSILON));
    }
}
