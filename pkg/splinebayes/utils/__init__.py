from .utility import AverageMeter, Timeout, as_generator, cfg_from_file, worker_count
from .errors import *
