"""
Command-line entry point: evaluate, topics, project, arousal-curve, synth,
validate and history.

Exit codes: 0 success, 1 usage error, 2 data error.
"""
# topspace/cli.py
import logging
import traceback
from pathlib import Path
from typing import Optional

import click
from pydantic import ValidationError

from .affect import ArousalMode, LexiconColumns, load_lexicon, write_lexicon
from .classify import dump_fda_model
from .config import MODEL_VARIANTS, Classifier, ExperimentConfig, Representation, load_key_value_file
from .corpus import SPLIT_PRESETS, ContextMode, Label, dump_dataset, load_dataset, load_stoplist
from .errors import TopSpaceError
from .evaluation import (
    aggregate_comparisons, arousal_curve, format_table, gen_synthetic, projection_2d,
    run_grid, synthetic_lexicon, write_aggregate, write_points, write_table, write_values,
)
from .logger_config import setup_logger
from .pipeline import TopSpaceBuilder
from .representation import LocalWeight, dump_matrix, save_vocabulary
from .topics import LdaConfig, QueryMode, TopicSource, VocabularyMode, default_num_topics, dump_topics

logger = logging.getLogger('topspace')

SEED_RANGE = click.IntRange(0, 2 ** 64 - 1)


def _choice(enum_cls):
    return click.Choice([member.value for member in enum_cls])


def _options(*decorators):
    def apply(f):
        for decorator in reversed(decorators):
            f = decorator(f)
        return f
    return apply


def _command_defaults(command: click.Command, values: dict) -> dict:
    """Сопоставляет ключи файла параметрам команды: 'topics', 'num_topics' и '--topics' равнозначны."""
    defaults = {}
    for param in command.params:
        names = {param.name} | {opt.lstrip('-').replace('-', '_') for opt in param.opts}
        for name in names & values.keys():
            value = values[name]
            if getattr(param, 'multiple', False) or param.nargs == -1:
                value = [v.strip() for v in value.split(',') if v.strip()]
            defaults[param.name] = value
    return defaults


def _load_config_file(ctx, param, value):
    """--config: значения файла становятся умолчаниями всех команд (флаги важнее)."""
    if value is None:
        return None
    values = load_key_value_file(value)
    ctx.default_map = {name: _command_defaults(command, values) for name, command in cli.commands.items()}
    return value


def _parse_split(value: Optional[str]):
    if value is None:
        return None
    try:
        idioms, literals = (int(part) for part in value.split(','))
    except ValueError:
        raise click.BadParameter(f"expected 'IDIOMS,LITERALS', got {value!r}", param_hint='--split')
    if idioms < 0 or literals < 0:
        raise click.BadParameter("split counts must be non-negative", param_hint='--split')
    return idioms, literals


corpus_option = click.option('--corpus', type=click.Path(dir_okay=False), required=True,
                             help='Корпус в формате JSON lines')
context_options = _options(
    click.option('--context', 'context_mode', type=_choice(ContextMode), default=ContextMode.SINGLE.value,
                 show_default=True, help='Один абзац или три'),
    click.option('--stoplist', 'stoplist_path', type=click.Path(dir_okay=False), default=None),
    click.option('--drop-target', is_flag=True, help='Удалять лексемы целевого выражения'),
)
lda_options = _options(
    click.option('--topics', 'num_topics', type=click.IntRange(min=1), default=None,
                 help='Число тем m (по умолчанию 2 для single, 4 для multi)'),
    click.option('--terms', 'terms_per_topic', type=click.IntRange(min=1), default=10, show_default=True),
    click.option('--alpha', type=click.FloatRange(min=0, min_open=True), default=None,
                 help='По умолчанию 50/m'),
    click.option('--beta', type=click.FloatRange(min=0, min_open=True), default=0.1, show_default=True),
    click.option('--iterations', type=click.IntRange(min=1), default=1000, show_default=True),
    click.option('--collection-topics', type=click.IntRange(min=1), default=10, show_default=True),
    click.option('--vocabulary', 'vocabulary_mode', type=_choice(VocabularyMode),
                 default=VocabularyMode.RESTRICTED.value, show_default=True),
    click.option('--topic-source', type=_choice(TopicSource), default=TopicSource.DOCUMENT.value,
                 show_default=True),
    click.option('--seed', type=SEED_RANGE, default=0, envvar='TOPSPACE_SEED', show_envvar=True,
                 show_default=True),
)
lexicon_options = _options(
    click.option('--lex-word-col', default=LexiconColumns.word, show_default=True),
    click.option('--lex-valence-col', default=LexiconColumns.valence, show_default=True),
    click.option('--lex-arousal-col', default=LexiconColumns.arousal, show_default=True),
    click.option('--lex-dominance-col', default=LexiconColumns.dominance, show_default=True),
)


def _columns(opts) -> LexiconColumns:
    return LexiconColumns(opts['lex_word_col'], opts['lex_valence_col'],
                          opts['lex_arousal_col'], opts['lex_dominance_col'])


def _lda_config(opts) -> LdaConfig:
    mode = ContextMode(opts['context_mode'])
    return LdaConfig(
        num_topics=opts['num_topics'] or default_num_topics(mode),
        terms_per_topic=opts['terms_per_topic'],
        alpha=opts['alpha'],
        beta=opts['beta'],
        iterations=opts['iterations'],
        seed=opts['seed'],
        collection_topics=opts['collection_topics'],
    )


def _experiment_config(opts, **overrides) -> ExperimentConfig:
    values = dict(
        context_mode=opts['context_mode'],
        lda=_lda_config(opts),
        seed=opts['seed'],
        keep_target=not opts['drop_target'],
        vocabulary_mode=opts['vocabulary_mode'],
        topic_source=opts['topic_source'],
        stoplist_path=opts['stoplist_path'],
    )
    for key in ('representation', 'classifier', 'runs', 'query_mode', 'local_weight',
                'arousal_mode', 'svm_c', 'svm_gamma', 'lexicon_path', 'workers'):
        if key in opts and opts[key] is not None:
            values[key] = opts[key]
    if 'affect' in opts:
        values['affect'] = opts['affect'] == 'on'
    if opts.get('knn_auto') is False:
        if not opts.get('knn_k'):
            raise click.UsageError("--no-knn-auto requires --knn-k")
        values['knn_k'] = opts['knn_k']
    values.update(overrides)
    return ExperimentConfig(**values)


# ==================== КОМАНДЫ ====================

@click.group(context_settings={'help_option_names': ['-h', '--help']})
@click.option('--config', type=click.Path(dir_okay=False), callback=_load_config_file, is_eager=True,
              expose_value=False, help='Файл key=value с умолчаниями для флагов')
@click.option('--log-dir', default='logs', show_default=True)
@click.option('-v', '--verbose', is_flag=True, help='DEBUG в консоль')
def cli(log_dir, verbose):
    """Классификация идиоматических и литеральных употреблений в пространстве тем."""
    setup_logger('topspace', log_dir=log_dir, console_level=logging.DEBUG if verbose else logging.INFO)


@cli.command()
@click.option('--corpus', type=click.Path(dir_okay=False), multiple=True, required=True,
              help='Корпус (можно несколько)')
@click.option('--split', default=None, help="Обучающая выборка 'I,L' (по умолчанию пресет выражения или 20,20)")
@click.option('--repr', 'representation', type=_choice(Representation), default=Representation.TOPICS.value,
              show_default=True)
@click.option('--classifier', type=_choice(Classifier), default=Classifier.FDA_KNN.value, show_default=True)
@click.option('--affect', type=click.Choice(['on', 'off']), default='off', show_default=True)
@click.option('--all-models', is_flag=True, help='Все восемь вариантов модели')
@click.option('--runs', type=click.IntRange(min=1), default=10, show_default=True)
@click.option('--knn-auto/--no-knn-auto', default=True, show_default=True, help='k = ceil(n/5)')
@click.option('--knn-k', type=click.IntRange(min=1), default=None, help='Фиксированное k при --no-knn-auto')
@click.option('--query-mode', type=_choice(QueryMode), default=QueryMode.TEXT.value, show_default=True)
@click.option('--local-weight', type=_choice(LocalWeight), default=LocalWeight.RAW.value, show_default=True)
@click.option('--arousal-mode', type=_choice(ArousalMode), default=ArousalMode.INDICATOR.value,
              show_default=True)
@click.option('--svm-c', type=click.FloatRange(min=0, min_open=True), default=1.0, show_default=True)
@click.option('--svm-gamma', type=click.FloatRange(min=0, min_open=True), default=None,
              help='По умолчанию 1/q')
@click.option('--lexicon', 'lexicon_path', type=click.Path(dir_okay=False), default=None)
@click.option('--workers', type=click.IntRange(min=1), default=1, show_default=True)
@click.option('-o', '--out', type=click.Path(dir_okay=False), default='results.tsv', show_default=True,
              help='Таблица результатов (рядом пишется <out>.json)')
@click.option('--aggregate', type=click.Path(dir_okay=False), default=None, help='Данные сводных графиков')
@click.option('--dump-dir', type=click.Path(file_okay=False), default=None,
              help='Матрицы, словари и модели каждого прогона')
@click.option('--db', envvar='TOPSPACE_DB_URL', default=None, help='URL журнала результатов')
@click.option('--no-ledger', is_flag=True, help='Не записывать результаты в журнал')
@context_options
@lda_options
@lexicon_options
def evaluate(**opts):
    """Повторные прогоны на случайных разбиениях; таблица Prec/Recall/Acc."""
    split = _parse_split(opts['split'])
    base = _experiment_config(opts)
    variants = MODEL_VARIANTS if opts['all_models'] else (
        (base.classifier, base.representation, base.affect),)

    datasets = []
    for path in opts['corpus']:
        dataset = load_dataset(path)
        datasets.append((dataset, split or SPLIT_PRESETS.get(dataset.expression, (20, 20))))

    stoplist = load_stoplist(base.stoplist_path)
    lexicon = None
    if base.lexicon_path and any(affect for *_, affect in variants):
        lexicon = load_lexicon(base.lexicon_path, _columns(opts))

    on_outcomes = None
    if opts['dump_dir']:
        dump_dir = Path(opts['dump_dir'])

        def on_outcomes(config, dataset, outcomes):
            _dump_outcomes(dump_dir / dataset.name / config.model_name, outcomes)

    grid = run_grid(datasets, base, variants, stoplist, lexicon, on_outcomes=on_outcomes)

    write_table(grid, opts['out'])
    click.echo(format_table(grid), nl=False)
    logger.info(f"✅ Таблица: {opts['out']} (+ {opts['out']}.json)")
    if opts['aggregate']:
        write_aggregate(aggregate_comparisons(grid), opts['aggregate'])

    if not opts['no_ledger']:
        from .ledger import ResultsLedger
        ledger = ResultsLedger(opts['db'])
        for key, result in grid.results.items():
            ledger.record(grid.configs[key], result)


def _dump_outcomes(directory: Path, outcomes):
    for outcome in outcomes:
        run_dir = directory / f"run_{outcome.run_index:02d}"
        run_dir.mkdir(parents=True, exist_ok=True)
        reps = outcome.representations
        dump_matrix(reps.train, run_dir / 'train.csv')
        dump_matrix(reps.query, run_dir / 'query.csv')
        save_vocabulary(reps.train.vocab, reps.train.global_weights, run_dir / 'train.vocab')
        if reps.topic_sets:
            dump_topics(reps.topic_sets, run_dir / 'topics.txt')
        if hasattr(outcome.model, 'train_projections'):
            dump_fda_model(outcome.model, run_dir / 'fda.txt')


@cli.command()
@corpus_option
@click.option('-o', '--out', type=click.Path(dir_okay=False), required=True)
@context_options
@lda_options
def topics(**opts):
    """Темы каждого размеченного документа корпуса."""
    config = _experiment_config(opts, representation=Representation.TOPICS)
    dataset = load_dataset(opts['corpus'])
    builder = TopSpaceBuilder(config, load_stoplist(config.stoplist_path))
    instances = dataset.labeled()
    hat = builder.topic_documents(instances, builder.contexts(instances), config.seed)
    dump_topics(hat.topic_sets, opts['out'])
    logger.info(f"✅ Темы {len(hat.topic_sets)} документов: {opts['out']}")


@cli.command()
@corpus_option
@click.option('--repr', 'representation', type=_choice(Representation), default=Representation.TOPICS.value,
              show_default=True)
@click.option('--local-weight', type=_choice(LocalWeight), default=LocalWeight.RAW.value, show_default=True)
@click.option('--out-dir', type=click.Path(file_okay=False), required=True,
              help='Пишет idiom.csv и literal.csv (x,y на строку)')
@context_options
@lda_options
def project(**opts):
    """Проекция обучающих документов на две главные компоненты."""
    config = _experiment_config(opts)
    dataset = load_dataset(opts['corpus'])
    builder = TopSpaceBuilder(config, load_stoplist(config.stoplist_path))
    space = builder.training_space(dataset.labeled(), config.seed)
    points = projection_2d(space.matrix)

    out_dir = Path(opts['out_dir'])
    out_dir.mkdir(parents=True, exist_ok=True)
    for label, name in ((Label.IDIOM, 'idiom'), (Label.LITERAL, 'literal')):
        write_points([p for p, inst in zip(points, space.instances) if inst.label is label],
                     out_dir / f"{name}.csv")
    logger.info(f"✅ Проекция {space.matrix.n_docs} документов: {out_dir}")


@cli.command('arousal-curve')
@corpus_option
@click.option('--lexicon', 'lexicon_path', type=click.Path(dir_okay=False), required=True)
@click.option('--out-dir', type=click.Path(file_okay=False), required=True,
              help='Пишет idiom.txt и literal.txt (одно значение на строку)')
@context_options
@lexicon_options
def arousal_curve_command(**opts):
    """Отсортированные средние центрированные значения возбуждения по классам."""
    dataset = load_dataset(opts['corpus'])
    lexicon = load_lexicon(opts['lexicon_path'], _columns(opts))
    config = ExperimentConfig(context_mode=opts['context_mode'], keep_target=not opts['drop_target'],
                              stoplist_path=opts['stoplist_path'], affect=True)
    builder = TopSpaceBuilder(config, load_stoplist(config.stoplist_path), lexicon)
    instances = dataset.labeled()
    docs = builder.contexts(instances)
    context = builder.arousal_context(docs)

    out_dir = Path(opts['out_dir'])
    out_dir.mkdir(parents=True, exist_ok=True)
    for label, name in ((Label.IDIOM, 'idiom'), (Label.LITERAL, 'literal')):
        class_docs = [doc for doc, inst in zip(docs, instances) if inst.label is label]
        write_values(arousal_curve(class_docs, lexicon, context.mean), out_dir / f"{name}.txt")
    logger.info(f"✅ Кривые возбуждения (m_A = {context.mean:.4f}): {out_dir}")


@cli.command()
@click.option('--idioms', type=click.IntRange(min=1), required=True)
@click.option('--literals', type=click.IntRange(min=1), required=True)
@click.option('--vocab-size', type=click.IntRange(min=1), default=50, show_default=True)
@click.option('--doc-len', type=click.IntRange(min=1), default=80, show_default=True)
@click.option('--overlap', type=click.FloatRange(0, 1), default=0.0, show_default=True)
@click.option('--paragraphs', type=click.IntRange(min=1), default=3, show_default=True)
@click.option('--expression', default='blow_whistle', show_default=True)
@click.option('--name', default='synthetic', show_default=True)
@click.option('--seed', type=SEED_RANGE, default=0, envvar='TOPSPACE_SEED', show_envvar=True)
@click.option('-o', '--out', type=click.Path(dir_okay=False), required=True)
@click.option('--lexicon-out', type=click.Path(dir_okay=False), default=None,
              help='Согласованный синтетический лексикон')
def synth(idioms, literals, vocab_size, doc_len, overlap, paragraphs, expression, name, seed, out,
          lexicon_out):
    """Синтетический корпус с контролируемым пересечением словарей классов."""
    dataset = gen_synthetic(idioms, literals, vocab_size, doc_len, overlap, seed,
                            paragraphs=paragraphs, expression=expression, name=name)
    dump_dataset(dataset, out)
    logger.info(f"✅ Синтетический корпус: {out} ({idioms} I / {literals} L)")
    if lexicon_out:
        write_lexicon(synthetic_lexicon(dataset, seed=seed), lexicon_out)
        logger.info(f"✅ Синтетический лексикон: {lexicon_out}")


@cli.command()
@click.argument('corpus', nargs=-1, type=click.Path(dir_okay=False))
@click.option('--lexicon', 'lexicon_file', type=click.Path(dir_okay=False), multiple=True)
@lexicon_options
def validate(corpus, lexicon_file, **opts):
    """Проверка файлов корпуса и лексикона."""
    if not corpus and not lexicon_file:
        raise click.UsageError("Nothing to validate: give corpus paths or --lexicon")
    for path in corpus:
        dataset = load_dataset(path)
        counts = dataset.counts()
        click.echo(f"{path}: ok ({counts[Label.IDIOM]} I, {counts[Label.LITERAL]} L, "
                   f"{counts[Label.UNKNOWN]} Q)")
    for path in lexicon_file:
        lexicon = load_lexicon(path, _columns(opts))
        click.echo(f"{path}: ok ({len(lexicon)} lemmas, {lexicon.duplicates} duplicates)")


@cli.command()
@click.option('--db', envvar='TOPSPACE_DB_URL', default=None)
@click.option('--limit', type=click.IntRange(min=1), default=20, show_default=True)
def history(db, limit):
    """Последние эксперименты из журнала результатов."""
    from .ledger import ResultsLedger
    ledger = ResultsLedger(db)
    for row in ledger.history(limit):
        click.echo(
            f"{row['fingerprint'][:12]}\t{row['dataset']}\t{row['model']}\t{row['runs']}\t"
            f"{row['precision']:.2f}\t{row['recall']:.2f}\t{row['accuracy']:.2f}"
        )
    ledger.print_statistics()


# ==================== ОСНОВНАЯ ФУНКЦИЯ ====================

def main(argv=None) -> int:
    """
    Запуск CLI без sys.exit; возвращает код завершения
    """
    try:
        rv = cli.main(args=argv, prog_name='topspace', standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return 1
    except click.Abort:
        logger.warning("⚠️ Прервано пользователем")
        return 1
    except click.ClickException as e:
        e.show()
        return 2
    except (TopSpaceError, ValidationError, OSError, ValueError) as e:
        logger.error(f"❌ {e}")
        logger.debug(traceback.format_exc())
        return 2
    return rv if isinstance(rv, int) else 0
