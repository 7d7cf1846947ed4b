"""Raw JVM stack traces for the pruning tests, each paired with its project prefixes.

``filter_oracle`` recomputes the expected project frames with a plain line scan,
independent of faultloc.preprocess.
"""
import re

LANG5 = """\
java.lang.IllegalArgumentException: Invalid locale format: _GB
\tat org.apache.commons.lang3.LocaleUtils.toLocale(LocaleUtils.java:96)
\tat org.apache.commons.lang3.LocaleUtilsTest.assertValidToLocale(LocaleUtilsTest.java:131)
\tat org.apache.commons.lang3.LocaleUtilsTest.testLang865(LocaleUtilsTest.java:1047)
\tat sun.reflect.NativeMethodAccessorImpl.invoke0(Native Method)
\tat sun.reflect.NativeMethodAccessorImpl.invoke(NativeMethodAccessorImpl.java:62)
\tat java.lang.reflect.Method.invoke(Method.java:498)
\tat org.junit.runners.ParentRunner.run(ParentRunner.java:363)"""

# 12 frames, 5 of them in org.example.app, interleaved with library frames
TWELVE = """\
java.lang.NullPointerException
\tat org.example.app.Parser.next(Parser.java:88)
\tat java.util.ArrayList.forEach(ArrayList.java:1257)
\tat org.example.app.Parser.parseAll(Parser.java:40)
\tat com.google.common.base.Preconditions.checkState(Preconditions.java:444)
\tat org.example.app.Loader.load(Loader.java:12)
\tat java.util.stream.ReferencePipeline$3$1.accept(ReferencePipeline.java:193)
\tat java.util.Spliterators$ArraySpliterator.forEachRemaining(Spliterators.java:948)
\tat org.example.app.Loader$1.run(Loader.java:30)
\tat sun.reflect.NativeMethodAccessorImpl.invoke0(Native Method)
\tat org.example.app.LoaderTest.testLoad(LoaderTest.java:21)
\tat junit.framework.TestCase.runTest(TestCase.java:176)
\tat junit.framework.TestCase.runBare(TestCase.java:141)"""
TWELVE_PROJECT = [
    ("org.example.app.Parser", "next"),
    ("org.example.app.Parser", "parseAll"),
    ("org.example.app.Loader", "load"),
    ("org.example.app.Loader$1", "run"),
    ("org.example.app.LoaderTest", "testLoad"),
]

CASES = [
    ("lang5", LANG5, ["org.apache.commons.lang3"]),
    ("twelve", TWELVE, ["org.example.app"]),
    ("commons_vs_util", """\
java.lang.ArithmeticException: / by zero
\tat org.apache.commons.lang.math.Fraction.divideBy(Fraction.java:10)
\tat java.util.HashMap.get(HashMap.java:1)
\tat org.apache.commons.lang.math.FractionTest.testDivide(FractionTest.java:5)""", ["org.apache.commons"]),
    ("multiline_header", """\
junit.framework.AssertionFailedError: expected:<[foo
bar]> but was:<[foo]>
\tat junit.framework.Assert.fail(Assert.java:57)
\tat org.jfree.chart.axis.AxisTest.testLabels(AxisTest.java:77)""", ["org.jfree"]),
    ("caused_by", """\
java.lang.RuntimeException: wrapper
\tat org.joda.time.Outer.call(Outer.java:3)
\tat org.joda.time.OuterTest.test(OuterTest.java:9)
Caused by: java.lang.IllegalStateException: inner
\tat org.joda.time.Inner.go(Inner.java:44)
\tat java.lang.Thread.run(Thread.java:745)
\t... 2 more""", ["org.joda.time"]),
    ("module_prefix", """\
java.lang.IndexOutOfBoundsException: Index 3 out of bounds for length 3
\tat java.base/jdk.internal.util.Preconditions.outOfBounds(Preconditions.java:64)
\tat java.base/java.util.Objects.checkIndex(Objects.java:372)
\tat com.acme.core.Table.cell(Table.java:52)
\tat com.acme.core.TableTest.testCell(TableTest.java:19)""", ["com.acme"]),
    ("native_and_unknown", """\
java.lang.IllegalStateException
\tat com.acme.io.Sink.write(Unknown Source)
\tat com.acme.io.Sink.flush(Native Method)
\tat com.acme.io.SinkTest.test(SinkTest.java:3)""", ["com.acme.io"]),
    ("lambda_frames", """\
java.lang.UnsupportedOperationException
\tat com.acme.fn.Mapper.lambda$apply$0(Mapper.java:17)
\tat java.util.Optional.map(Optional.java:215)
\tat com.acme.fn.Mapper.apply(Mapper.java:17)
\tat com.acme.fn.MapperTest.testApply(MapperTest.java:8)""", ["com.acme.fn"]),
    ("constructor", """\
java.lang.IllegalArgumentException: negative
\tat org.mockito.internal.Foo.<init>(Foo.java:22)
\tat org.mockito.internal.FooTest.testCtor(FooTest.java:7)""", ["org.mockito"]),
    ("static_init", """\
java.lang.ExceptionInInitializerError
\tat org.mockito.Registry.<clinit>(Registry.java:4)
\tat org.mockito.RegistryTest.testLoad(RegistryTest.java:2)""", ["org.mockito"]),
    ("no_project_frames", """\
java.lang.OutOfMemoryError: Java heap space
\tat java.util.Arrays.copyOf(Arrays.java:3332)
\tat java.lang.StringBuilder.append(StringBuilder.java:136)""", ["org.example"]),
    ("two_prefixes", """\
java.lang.ClassCastException: A cannot be cast to B
\tat org.one.A.cast(A.java:1)
\tat net.sf.other.B.go(B.java:2)
\tat org.two.C.run(C.java:3)
\tat org.one.ATest.test(ATest.java:4)""", ["org.one", "net.sf.other"]),
    ("crlf", "java.lang.Error: x\r\n\tat org.crlf.A.a(A.java:1)\r\n\tat java.lang.Thread.run(Thread.java:1)\r\n",
     ["org.crlf"]),
    ("spaces_not_tabs", """\
java.lang.Error: spaces
    at org.sp.A.a(A.java:1)
    at java.lang.Thread.run(Thread.java:1)
    at org.sp.ATest.t(ATest.java:9)""", ["org.sp"]),
    ("assertion_error", """\
java.lang.AssertionError: expected:<1> but was:<2>
\tat org.junit.Assert.fail(Assert.java:88)
\tat org.junit.Assert.failNotEquals(Assert.java:834)
\tat org.junit.Assert.assertEquals(Assert.java:645)
\tat org.jsoup.nodes.ElementTest.testText(ElementTest.java:101)""", ["org.jsoup"]),
    ("deep_recursion", "java.lang.StackOverflowError\n" + "\n".join(
        f"\tat com.deep.Walker.walk(Walker.java:{10 + (i % 3)})" for i in range(9)
    ) + "\n\tat com.deep.WalkerTest.t(WalkerTest.java:5)", ["com.deep"]),
    ("prefix_boundary", """\
java.lang.Error: prefix
\tat org.apache.commons.lang3.A.a(A.java:1)
\tat org.apache.commons.lang3x.B.b(B.java:2)
\tat org.apache.commons.lang.C.c(C.java:3)""", ["org.apache.commons.lang3"]),
    ("inner_class", """\
java.lang.IllegalStateException: closed
\tat org.jsoup.helper.HttpConnection$Response.body(HttpConnection.java:700)
\tat org.jsoup.helper.HttpConnection$Response$1.read(HttpConnection.java:712)
\tat org.jsoup.helper.HttpConnectionTest.testBody(HttpConnectionTest.java:60)""", ["org.jsoup"]),
    ("trailing_blank_lines", "java.lang.Error: blank\n\n\tat org.bl.A.a(A.java:1)\n\n", ["org.bl"]),
    ("gson_nested", """\
com.google.gson.JsonSyntaxException: java.lang.IllegalStateException: Expected BEGIN_OBJECT
\tat com.google.gson.internal.bind.ReflectiveTypeAdapterFactory$Adapter.read(ReflectiveTypeAdapterFactory.java:224)
\tat com.google.gson.Gson.fromJson(Gson.java:887)
\tat com.google.gson.functional.ObjectTest.testEmpty(ObjectTest.java:411)
\tat sun.reflect.NativeMethodAccessorImpl.invoke0(Native Method)""", ["com.google.gson"]),
    ("closure_compiler", """\
java.lang.RuntimeException: INTERNAL COMPILER ERROR.
\tat com.google.javascript.jscomp.NodeUtil.getValue(NodeUtil.java:1203)
\tat com.google.common.collect.Lists.newArrayList(Lists.java:10)
\tat com.google.javascript.jscomp.PeepholeFold.tryFold(PeepholeFold.java:90)
\tat com.google.javascript.jscomp.PeepholeFoldTest.testFold(PeepholeFoldTest.java:33)""", ["com.google.javascript"]),
]

_ORACLE_FRAME = re.compile(r"^\s*at (?:[\w.$-]+/)?(\S+)\.([^.(\s]+)\(")


def filter_oracle(raw, prefixes):
    """(class, method) of every frame line whose class starts with a prefix, in order."""
    out = []
    for line in raw.splitlines():
        m = _ORACLE_FRAME.match(line)
        if m and any(m.group(1).startswith(p) for p in prefixes):
            out.append((m.group(1), m.group(2)))
    return out


def header_oracle(raw):
    lines = raw.replace("\r\n", "\n").split("\n")
    head = []
    for line in lines:
        if _ORACLE_FRAME.match(line):
            break
        head.append(line)
    while head and not head[-1].strip():
        head.pop()
    return "\n".join(head)
