import csv
import os
import shutil
import tempfile
import unittest
import numpy as np

from splinebayes.cli import build_parser, main, read_dataset
from splinebayes.simulation import COVERAGE_HEADER, true_function_beta_mix


def read_rows(path):
    with open(path) as f:
        return list(csv.reader(f))


class TestCli(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.mkdtemp()
        rng = np.random.default_rng(12)
        x = rng.uniform(size=80)
        y = true_function_beta_mix(x) + rng.standard_normal(80)
        cls.data = os.path.join(cls.tmp, 'data.csv')
        with open(cls.data, 'w') as f:
            f.write('x,y\n')
            for xi, yi in zip(x, y):
                f.write('{},{}\n'.format(repr(float(xi)), repr(float(yi))))

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.tmp, ignore_errors=True)

    def out(self, name):
        return os.path.join(self.tmp, name)

    def test_read_dataset(self):
        data = read_dataset(self.data)
        self.assertEqual(data.n, 80)

    def test_fit(self):
        self.assertEqual(main(['fit', self.data, '--out', self.out('fit.csv'),
                               '--gcv-out', self.out('gcv.csv')]), 0)
        rows = read_rows(self.out('fit.csv'))
        self.assertEqual(rows[0], ['z', 'fhat'])
        self.assertEqual(len(rows), 513)
        self.assertEqual(read_rows(self.out('gcv.csv'))[0], ['lambda', 'score'])

    def test_interval(self):
        self.assertEqual(main(['interval', self.data, '--lambda', '1e-4', '--N', '30',
                               '--functional', 'integral:1.0', '--out', self.out('ci.csv')]), 0)
        header, row = read_rows(self.out('ci.csv'))
        self.assertEqual(header, ['functional', 'alpha', 'center', 'radius', 'lower', 'upper'])
        center, radius = float(row[2]), float(row[3])
        self.assertGreater(radius, 0.0)
        self.assertAlmostEqual(float(row[4]), center - radius)

    def test_bad_functional(self):
        self.assertEqual(main(['interval', self.data, '--lambda', '1e-4', '--N', '30',
                               '--functional', 'max:0.5', '--out', self.out('bad.csv')]), 1)

    def test_sample(self):
        self.assertEqual(main(['sample', self.data, '--lambda', '1e-4', '--N', '30', '--paths', '3',
                               '--grid-size', '11', '--out', self.out('paths.csv'),
                               '--band-out', self.out('band.csv')]), 0)
        rows = read_rows(self.out('paths.csv'))
        self.assertEqual(rows[0], ['path_id', 'z', 'value'])
        self.assertEqual(len(rows), 1 + 3 * 11)
        band = read_rows(self.out('band.csv'))
        self.assertEqual(len(band), 12)
        for _, center, lower, upper in band[1:]:
            self.assertLessEqual(float(lower), float(center))
            self.assertLessEqual(float(center), float(upper))

    def test_eigen(self):
        self.assertEqual(main(['eigen', '--N', '10', '--out', self.out('eigen.csv')]), 0)
        rows = read_rows(self.out('eigen.csv'))
        self.assertEqual(rows[0], ['nu', 'gamma', 'rho', 'v_residual', 'u_residual'])
        self.assertEqual(len(rows), 11)
        self.assertEqual(float(rows[1][2]), 0.0)
        self.assertLess(float(rows[3][3]), 1e-6)
        self.assertEqual(float(rows[1][1]), 0.0)
        self.assertAlmostEqual(float(rows[3][1]), 4.730040745, places=8)
        self.assertAlmostEqual(float(rows[3][1]) ** 4, float(rows[3][2]), delta=1e-8 * float(rows[3][2]))

    def test_coverage(self):
        out_dir = self.out('coverage')
        self.assertEqual(main(['coverage', '--replications', '2', '--n', '40', '--N', '20',
                               '--fixed-h', '0.3', '--out', out_dir]), 0)
        rows = read_rows(os.path.join(out_dir, 'coverage.csv'))
        self.assertEqual(rows[0], COVERAGE_HEADER)
        self.assertEqual({r[2] for r in rows[1:]}, {'CR', 'MCR', 'restricted_MCR'})
        self.assertTrue(os.path.isfile(os.path.join(out_dir, 'curve.csv')))

    def test_coverage_gcv_out(self):
        out_dir = self.out('coverage_gcv')
        gcv_path = self.out('coverage_gcv.csv')
        self.assertEqual(main(['coverage', '--replications', '1', '--n', '60', '--N', '20',
                               '--gcv', '--h-scale', '0.5', '--tau-scale', '1e-6',
                               '--gcv-out', gcv_path, '--out', out_dir]), 0)
        rows = read_rows(gcv_path)
        self.assertEqual(rows[0], ['lambda', 'score'])
        self.assertEqual(len(rows), 41)
        lams = [float(r[0]) for r in rows[1:]]
        self.assertEqual(lams, sorted(lams))

    def test_support_error(self):
        path = self.out('counts.csv')
        with open(path, 'w') as f:
            f.write('x,y\n0.1,2.0\n0.5,-1.0\n0.9,0.0\n')
        self.assertEqual(main(['fit', path, '--model', 'poisson', '--lambda', '1e-3', '--N', '5',
                               '--out', self.out('counts_fit.csv')]), 1)

    def test_design_range_error(self):
        path = self.out('outside.csv')
        with open(path, 'w') as f:
            f.write('x,y\n0.1,2.0\n1.5,1.0\n')
        self.assertEqual(main(['fit', path, '--lambda', '1e-3', '--N', '5',
                               '--out', self.out('outside_fit.csv')]), 1)

    def test_tau_scale_widens_interval(self):
        radii = []
        for scale in ('1.0', '1e-6'):
            path = self.out('ci_{}.csv'.format(scale))
            self.assertEqual(main(['interval', self.data, '--lambda', '1e-4', '--N', '30',
                                   '--tau-scale', scale, '--functional', 'eval:0.5',
                                   '--out', path]), 0)
            radii.append(float(read_rows(path)[1][3]))
        self.assertGreater(radii[1], radii[0])

    def test_parser(self):
        args = build_parser().parse_args(['fit', 'data.csv', '--lambda', '0.1'])
        self.assertEqual(args.lam, 0.1)
        with self.assertRaises(SystemExit):
            build_parser().parse_args(['fit', 'data.csv', '--lambda', '0.1', '--gcv'])


if __name__ == "__main__":
    unittest.main()
